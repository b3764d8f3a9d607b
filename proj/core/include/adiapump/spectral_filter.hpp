#pragma once

#include <Eigen/Core>
#include <vector>

#include "adiapump/pump_model.hpp"

namespace adiapump {

/// Smooth energy cutoff chi: 1 on [center-plateau, center+plateau], 0 outside
/// [center-support, center+support] (inside the open band), with C-infinity
/// edges; applied to states as a Chebyshev polynomial of the Hamiltonian.
class SpectralFilter {
 public:
  /// degree <= 0 requests auto-fit: the degree grows until the sup error of
  /// the Chebyshev approximant on the fit interval drops below 1e-8.
  SpectralFilter(double center, double plateau_halfwidth, double support_halfwidth,
                 int degree = 0);

  double center() const { return center_; }
  double plateau_halfwidth() const { return plateau_; }
  double support_halfwidth() const { return support_; }
  int degree() const { return static_cast<int>(coeff_.size()) - 1; }

  /// Exact profile chi(E).
  double profile(double E) const;

  /// Sup error of the approximant over [lo, hi] on a dense grid.
  double sup_error(double lo, double hi, int samples = 20001) const;

  /// chi(H) applied to a block of vectors by Clenshaw recurrence on the
  /// rescaled Hamiltonian. spectrum_lo/hi must enclose spec(H) (Gershgorin
  /// bounds are fine); they default to the fit interval used at construction.
  Eigen::MatrixXcd apply(const SparseCplx& H, const Eigen::MatrixXcd& block) const;

  /// Re-fits the coefficients on [lo, hi] (needed when spec(H) leaves [0,4]).
  void refit(double lo, double hi);

 private:
  double center_, plateau_, support_;
  double fit_lo_ = 0.0, fit_hi_ = 4.0;
  int requested_degree_ = 0;
  std::vector<double> coeff_;  // Chebyshev coefficients on the fit interval
};

/// Gershgorin enclosure of the spectrum of a sparse Hermitian matrix.
std::pair<double, double> gershgorin_bounds(const SparseCplx& H);

}  // namespace adiapump
