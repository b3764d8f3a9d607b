#pragma once

#include <Eigen/Core>
#include <map>
#include <vector>

#include "adiapump/scattering.hpp"
#include "adiapump/spectral_density.hpp"

namespace adiapump {

/// Diagonal of i (dS/ds) S^dag: the per-lead pumping density in energy.
/// Exactly real for unitary S; the imaginary residue is recorded.
/// Throws NonUnitaryInputError when ||S^dag S - 1||_max > 1e-6.
Eigen::VectorXd bpt_integrand(const ScatteringMatrix& S, const Eigen::MatrixXcd& dS_ds,
                              double* imag_residual = nullptr);

struct BptResult {
  double s = 0.0;
  Eigen::VectorXd per_lead;                      // dQ_j/ds
  std::map<double, Eigen::VectorXd> integrand_samples;  // E -> (i dS S*)_jj
  double imag_residual = 0.0;
  double quadrature_estimate = 0.0;
};

struct QuadratureSpec {
  int order = 32;
  double rel_tol = 1e-8;
};

/// Per-epoch pumped current dQ_j/ds = -(1/2pi) [sum_i w_i (i F_j)(E_i)
/// + int rho'(E) (i F_j)(E) dE] with F_j = (dS/ds S^dag)_jj; the smooth part
/// uses Gauss-Legendre with an order-doubling error estimate.
BptResult pumped_current(const DrivenPumpModel& model, double s, const SpectralDensity& rho,
                         const QuadratureSpec& quad = {});

struct CycleResult {
  Eigen::VectorXd Q;          // per-lead charge over the cycle
  double grid_estimate = 0.0; // change under grid halving
};

/// Charge over one period by composite trapezoid on s_grid. Throws
/// GridTooCoarseError if halving the grid moves any component by > 1e-4.
CycleResult cycle_charge(const DrivenPumpModel& model, const SpectralDensity& rho,
                         const std::vector<double>& s_grid, const QuadratureSpec& quad = {});

struct WindingResult {
  long winding = 0;      // of det S(s, mu) over the cycle
  double residual = 0.0; // |sum_j Q_j - (-winding)|
  double max_step = 0.0; // largest unwrapped phase step (radians)
  Eigen::VectorXd Q;     // per-lead cycle charge at the Fermi energy
};

/// Sum rule diagnostic: sum_j (i dS S*)_jj = i d log det S, so the total
/// cycle charge equals minus the winding number of det S(s, mu).
/// Throws PhaseUnwrapAmbiguousError if any phase step reaches pi.
WindingResult total_charge_winding(const DrivenPumpModel& model, double mu,
                                   const std::vector<double>& s_grid);

/// Uniform grid helper covering [s0, s1] with n+1 points.
std::vector<double> uniform_grid(double s0, double s1, int n);

}  // namespace adiapump
