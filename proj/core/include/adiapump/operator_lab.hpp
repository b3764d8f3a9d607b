#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <memory>

#include "adiapump/dilation.hpp"
#include "adiapump/pump_model.hpp"

namespace adiapump {

/// Discretized half-line laboratory: Neumann Laplacian H0 with rows
/// (2 delta - shifts)/h^2 and the boundary row implementing psi_0 = psi_1,
/// position X with sites at x_i = (i - 1/2) h (wall at x = 0), antisymmetric
/// central-difference momentum P, symmetrized dilation generator
/// A0 = (XP + PX)/2 and an exterior-scaling variant A with profile v.
/// Functional calculus is dense; eigendecompositions are cached per grid.
class HalfLineGrid {
 public:
  HalfLineGrid(int n_sites, double spacing);

  int size() const { return n_; }
  double spacing() const { return h_; }
  double box_length() const { return n_ * h_; }

  const Eigen::MatrixXd& H0() const { return H0_; }
  const Eigen::MatrixXcd& P() const { return P_; }
  const Eigen::MatrixXcd& A0() const { return A0_; }
  Eigen::MatrixXcd A_exterior(const VProfile& v) const;
  double x(int i) const { return (i + 0.5) * h_; }

  /// ||H0|| as the largest |eigenvalue|.
  double h0_norm() const;

  /// g(H0) and f(A0) by dense eigendecomposition; the complex_shift variant
  /// evaluates f(A0 - i*shift) for entire f.
  Eigen::MatrixXd g_of_H0(const std::function<double(double)>& g) const;
  Eigen::MatrixXcd f_of_A0(const std::function<std::complex<double>(std::complex<double>)>& f,
                           double complex_shift = 0.0) const;

  /// Worst eigenpair residual ||Hv - lambda v|| over both cached solvers.
  double eigen_residual() const;

  /// i[H0, A0] assembled on a grid extended by `pad` sites and truncated back:
  /// a local operator free of far-wall artifacts (the compression of the
  /// exact finite-box commutator has identically vanishing diagonal and is
  /// useless for positivity estimates).
  Eigen::MatrixXcd assembled_commutator(int pad = 300) const;

 private:
  void ensure_h0_eig() const;
  void ensure_a0_eig() const;

  int n_;
  double h_;
  Eigen::MatrixXd H0_;
  Eigen::MatrixXcd P_, A0_;
  mutable std::shared_ptr<std::pair<Eigen::VectorXd, Eigen::MatrixXd>> h0_eig_;
  mutable std::shared_ptr<std::pair<Eigen::VectorXd, Eigen::MatrixXcd>> a0_eig_;
};

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_error = 0.0;
};

/// ||g(H0) f(A0)||_HS against (2pi)^{-1/2} (int |g|^2 dE / 2E)^{1/2} ||f||_2.
/// Precondition: g supported at low energy (E << 1/h^2); violations throw
/// UnsupportedFunctionError.
IdentityCheck hs_norm_check(const HalfLineGrid& grid, const std::function<double(double)>& g,
                            const std::function<double(double)>& f, double energy_cut = 80.0);

/// tr(g(H0) f(A0)) against (2pi)^{-1} int g dE / 2E * int f da.
IdentityCheck trace_formula_check(const HalfLineGrid& grid,
                                  const std::function<double(double)>& g,
                                  const std::function<double(double)>& f,
                                  double energy_cut = 80.0);

struct PullThroughResult {
  double inner_residual = 0.0;  // max |H0 f(A0) - f(A0 - 2i) H0| over inner rows/cols
  double relative = 0.0;        // inner_residual / ||H0||
};

/// H0 f(A0) = f(A0 - 2i) H0 for entire f of Gaussian type, on the inner
/// portion of the grid (a quarter of the box excluded at both ends; the
/// discrete A0 has no self-adjoint match at the wall).
PullThroughResult pull_through_check(
    const HalfLineGrid& grid,
    const std::function<std::complex<double>(std::complex<double>)>& f,
    double exclusion_fraction = 0.25);

struct MourreResult {
  double theta = 0.0;
  int subspace_dim = 0;
};

/// Smallest eigenvalue of C compressed to the spectral subspace of H on
/// [e_lo, e_hi]. C defaults to a wall-free assembled commutator i[H, A];
/// passing the exact finite-box commutator gives the trivially nonpositive
/// answer. Throws EmptyWindowError when H has no eigenvalues in the window.
MourreResult mourre_bound(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& C, double e_lo,
                          double e_hi);

/// Mourre estimate for the pump lattice at epoch s: H and the exterior
/// scaling A are assembled on leads extended by `pad` sites, the commutator
/// i[H, A] truncated back to the box, and compressed to the box spectral
/// window.
MourreResult mourre_bound_pump(const DrivenPumpModel& model, double s, double e_lo,
                               double e_hi, int lead_length, int pad = 60,
                               const VProfile& v = {});

}  // namespace adiapump
