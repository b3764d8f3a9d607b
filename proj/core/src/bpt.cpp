#include "adiapump/bpt.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "adiapump/errors.hpp"
#include "adiapump/quadrature.hpp"

namespace adiapump {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

Eigen::VectorXd bpt_integrand(const ScatteringMatrix& S, const Eigen::MatrixXcd& dS_ds,
                              double* imag_residual) {
  const double u = S.unitarity_residual();
  if (u > 1e-6) {
    std::ostringstream os;
    os << "bpt_integrand: non-unitary S, residual " << u;
    throw NonUnitaryInputError(os.str());
  }
  const Eigen::MatrixXcd M = cplx(0.0, 1.0) * dS_ds * S.S.adjoint();
  Eigen::VectorXd out(M.rows());
  double res = 0.0;
  for (int j = 0; j < M.rows(); ++j) {
    out(j) = M(j, j).real();
    res = std::max(res, std::abs(M(j, j).imag()));
  }
  if (imag_residual) *imag_residual = res;
  return out;
}

namespace {

// (i dS S^dag)_jj at one energy; shared helper.
Eigen::VectorXd integrand_at(const DrivenPumpModel& model, double s, double E,
                             double* imag_res) {
  const ScatteringMatrix S = scattering_matrix(model, s, E);
  const SmatrixDerivative d = smatrix_derivative(model, s, E);
  return bpt_integrand(S, d.dS, imag_res);
}

}  // namespace

BptResult pumped_current(const DrivenPumpModel& model, double s, const SpectralDensity& rho,
                         const QuadratureSpec& quad) {
  rho.validate();
  const int n = model.geometry.n_leads;
  BptResult out;
  out.s = s;
  out.per_lead = Eigen::VectorXd::Zero(n);

  // dQ_j/ds = -(i/2pi) \int d(rho)(E) (dS/ds S^dag)_jj; with the real-valued
  // integrand (i dS S^dag)_jj =: f_j this reads -(1/2pi) \int d(rho) f_j.
  for (const auto& jmp : rho.jumps) {
    double ir = 0.0;
    const Eigen::VectorXd f = integrand_at(model, s, jmp.energy, &ir);
    out.imag_residual = std::max(out.imag_residual, ir);
    out.integrand_samples[jmp.energy] = f;
    out.per_lead -= (jmp.weight / kTwoPi) * f;
  }
  if (rho.smooth) {
    for (int j = 0; j < n; ++j) {
      auto fj = [&](double E) {
        double ir = 0.0;
        const Eigen::VectorXd f = integrand_at(model, s, E, &ir);
        return rho.smooth->density(E) * f(j);
      };
      const GlResult r = gl_integrate_doubling(fj, rho.smooth->support_lo,
                                               rho.smooth->support_hi, quad.order);
      const double scale = std::max(std::abs(r.value), 1e-30);
      if (r.error_estimate / scale > quad.rel_tol && r.error_estimate > 1e-14) {
        std::ostringstream os;
        os << "pumped_current: smooth-part quadrature estimate " << r.error_estimate
           << " exceeds tolerance at s=" << s;
        throw QuadratureNotConvergedError(os.str());
      }
      out.per_lead(j) -= r.value / kTwoPi;
      out.quadrature_estimate = std::max(out.quadrature_estimate, r.error_estimate);
    }
  }
  return out;
}

namespace {

Eigen::VectorXd trapezoid(const std::vector<double>& s,
                          const std::vector<Eigen::VectorXd>& f) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(f.front().size());
  for (size_t i = 0; i + 1 < s.size(); ++i)
    acc += 0.5 * (s[i + 1] - s[i]) * (f[i] + f[i + 1]);
  return acc;
}

}  // namespace

CycleResult cycle_charge(const DrivenPumpModel& model, const SpectralDensity& rho,
                         const std::vector<double>& s_grid, const QuadratureSpec& quad) {
  if (s_grid.size() < 5) throw GridTooCoarseError("cycle_charge: need at least 5 grid points");
  for (size_t i = 0; i + 1 < s_grid.size(); ++i)
    if (!(s_grid[i + 1] > s_grid[i]))
      throw GridTooCoarseError("cycle_charge: s_grid must be strictly increasing");

  std::vector<Eigen::VectorXd> f(s_grid.size());
  for (size_t i = 0; i < s_grid.size(); ++i)
    f[i] = pumped_current(model, s_grid[i], rho, quad).per_lead;

  CycleResult out;
  out.Q = trapezoid(s_grid, f);
  std::vector<double> s_half;
  std::vector<Eigen::VectorXd> f_half;
  for (size_t i = 0; i < s_grid.size(); i += 2) {
    s_half.push_back(s_grid[i]);
    f_half.push_back(f[i]);
  }
  if (s_half.back() != s_grid.back()) {
    s_half.push_back(s_grid.back());
    f_half.push_back(f.back());
  }
  out.grid_estimate = (out.Q - trapezoid(s_half, f_half)).cwiseAbs().maxCoeff();
  if (out.grid_estimate > 1e-4) {
    std::ostringstream os;
    os << "cycle_charge: grid halving moved the result by " << out.grid_estimate;
    throw GridTooCoarseError(os.str());
  }
  return out;
}

WindingResult total_charge_winding(const DrivenPumpModel& model, double mu,
                                   const std::vector<double>& s_grid) {
  WindingResult out;
  std::vector<double> args(s_grid.size());
  std::vector<Eigen::VectorXd> f(s_grid.size());
  for (size_t i = 0; i < s_grid.size(); ++i) {
    const ScatteringMatrix S = scattering_matrix(model, s_grid[i], mu);
    args[i] = std::arg(S.S.determinant());
    const SmatrixDerivative d = smatrix_derivative(model, s_grid[i], mu);
    f[i] = bpt_integrand(S, d.dS);
  }
  double unwrapped = args[0];
  double prev = args[0];
  for (size_t i = 1; i < s_grid.size(); ++i) {
    double step = args[i] - prev;
    while (step > M_PI) step -= kTwoPi;
    while (step < -M_PI) step += kTwoPi;
    out.max_step = std::max(out.max_step, std::abs(step));
    if (out.max_step >= M_PI - 1e-9) {
      std::ostringstream os;
      os << "total_charge_winding: phase step " << out.max_step
         << " rad at s=" << s_grid[i] << "; refine the grid";
      throw PhaseUnwrapAmbiguousError(os.str());
    }
    unwrapped += step;
    prev = args[i];
  }
  out.winding = std::lround((unwrapped - args[0]) / kTwoPi);
  // Fermi-sea cycle charge at mu: dQ_j/ds = +(1/2pi)(i dS S^dag)_jj.
  for (auto& v : f) v /= kTwoPi;
  out.Q = trapezoid(s_grid, f);
  out.residual = std::abs(out.Q.sum() - static_cast<double>(-out.winding));
  return out;
}

std::vector<double> uniform_grid(double s0, double s1, int n) {
  std::vector<double> g(n + 1);
  for (int i = 0; i <= n; ++i) g[i] = s0 + (s1 - s0) * i / n;
  return g;
}

}  // namespace adiapump
