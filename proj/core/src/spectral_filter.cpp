#include "adiapump/spectral_filter.hpp"

#include <cmath>

#include "adiapump/errors.hpp"
#include "adiapump/smoothstep.hpp"

namespace adiapump {

SpectralFilter::SpectralFilter(double center, double plateau_halfwidth,
                               double support_halfwidth, int degree)
    : center_(center), plateau_(plateau_halfwidth), support_(support_halfwidth),
      requested_degree_(degree) {
  if (!(plateau_ > 0 && support_ > plateau_))
    throw ModelInvalidError("spectral filter: need 0 < plateau < support halfwidth");
  if (!(center_ - support_ > 0.0 && center_ + support_ < 4.0))
    throw ModelInvalidError("spectral filter: support must lie inside the open band (0,4)");
  refit(0.0, 4.0);
}

double SpectralFilter::profile(double E) const {
  const double t = std::abs(E - center_);
  if (t <= plateau_) return 1.0;
  if (t >= support_) return 0.0;
  return smoothstep_cinf((support_ - t) / (support_ - plateau_));
}

void SpectralFilter::refit(double lo, double hi) {
  fit_lo_ = lo;
  fit_hi_ = hi;
  auto fit = [&](int deg) {
    // Chebyshev interpolation at first-kind nodes on [lo, hi].
    const int n = deg + 1;
    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i) {
      const double x = std::cos(M_PI * (i + 0.5) / n);
      vals[i] = profile(0.5 * (hi + lo) + 0.5 * (hi - lo) * x);
    }
    std::vector<double> c(n);
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += vals[i] * std::cos(M_PI * k * (i + 0.5) / n);
      c[k] = 2.0 * acc / n;
    }
    c[0] /= 2.0;
    return c;
  };
  if (requested_degree_ > 0) {
    coeff_ = fit(requested_degree_);
    return;
  }
  for (int deg = 128; deg <= 4096; deg *= 2) {
    coeff_ = fit(deg);
    if (sup_error(lo, hi, 8192) <= 1e-8) {
      // trim the high tail once converged
      int last = static_cast<int>(coeff_.size()) - 1;
      while (last > 1 && std::abs(coeff_[last]) < 1e-12) --last;
      coeff_.resize(last + 1);
      if (sup_error(lo, hi, 8192) <= 1e-8) return;
      coeff_ = fit(deg);
      return;
    }
  }
  throw ModelInvalidError("spectral filter: Chebyshev fit did not reach 1e-8 by degree 4096");
}

namespace {
double cheb_eval(const std::vector<double>& c, double x) {
  // Clenshaw
  double b1 = 0.0, b2 = 0.0;
  for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
    const double b0 = c[k] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return c[0] + x * b1 - b2;
}
}  // namespace

double SpectralFilter::sup_error(double lo, double hi, int samples) const {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double E = lo + (hi - lo) * i / (samples - 1);
    const double x = (2.0 * E - (fit_hi_ + fit_lo_)) / (fit_hi_ - fit_lo_);
    worst = std::max(worst, std::abs(cheb_eval(coeff_, x) - profile(E)));
  }
  return worst;
}

Eigen::MatrixXcd SpectralFilter::apply(const SparseCplx& H,
                                       const Eigen::MatrixXcd& block) const {
  // Clenshaw on the rescaled operator X = (2H - (hi+lo))/(hi-lo).
  const double a = 2.0 / (fit_hi_ - fit_lo_);
  const double b = -(fit_hi_ + fit_lo_) / (fit_hi_ - fit_lo_);
  Eigen::MatrixXcd b1 = Eigen::MatrixXcd::Zero(block.rows(), block.cols());
  Eigen::MatrixXcd b2 = b1;
  for (int k = static_cast<int>(coeff_.size()) - 1; k >= 1; --k) {
    Eigen::MatrixXcd b0 = coeff_[k] * block + 2.0 * (a * (H * b1) + b * b1) - b2;
    b2.swap(b1);
    b1 = std::move(b0);
  }
  return coeff_[0] * block + a * (H * b1) + b * b1 - b2;
}

std::pair<double, double> gershgorin_bounds(const SparseCplx& H) {
  const int N = static_cast<int>(H.rows());
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(N, 0.0);
  Eigen::VectorXd hi = lo;
  for (int k = 0; k < H.outerSize(); ++k) {
    double center = 0.0, radius = 0.0;
    for (SparseCplx::InnerIterator it(H, k); it; ++it) {
      if (it.row() == it.col())
        center = it.value().real();
      else
        radius += std::abs(it.value());
    }
    lo(k) = center - radius;
    hi(k) = center + radius;
  }
  return {lo.minCoeff(), hi.maxCoeff()};
}

}  // namespace adiapump
