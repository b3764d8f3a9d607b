#pragma once

#include <Eigen/Core>

#include "adiapump/pump_model.hpp"

namespace adiapump {

/// Propagating lead mode at energy E: E = 2 - 2 cos k, group velocity 2 sin k.
struct LeadMode {
  double energy = 0.0;
  double k = 0.0;
  double velocity = 0.0;
};

/// Inverts the lead dispersion. Throws BandEdgeError within band_guard of the
/// band edges 0 and 4, where no single-epoch scattering description applies.
LeadMode lead_mode(double E, double band_guard = 1e-6);

struct ScatteringMatrix {
  double s = 0.0;
  double E = 0.0;
  LeadMode mode;
  Eigen::MatrixXcd S;

  double unitarity_residual() const;  // max-norm of S^dag S - 1
};

/// Frozen S(s,E) by mode matching: solves the (m+n)-dimensional linear system
/// for the pump amplitudes and one outgoing column per incident lead, with the
/// ansatz delta_ji e^{-ikx} + S_ji e^{ikx} imposed on lead sites 1 and 2.
/// Throws SingularMatchingError when the matching system is rank-deficient
/// (an exact bound state at E).
ScatteringMatrix scattering_matrix(const DrivenPumpModel& model, double s, double E);

/// Same fiber through the retarded Green's function of the pump block dressed
/// by the lead self-energy Sigma_j(E) = -e^{ik} |c_j|^2, combined with
/// flux-normalized couplings. Cross-validation contract: agrees with the mode
/// matching route to 1e-8 max-norm.
ScatteringMatrix scattering_matrix_gf(const DrivenPumpModel& model, double s, double E);

struct SmatrixDerivative {
  Eigen::MatrixXcd dS;
  double error_estimate = 0.0;  // max-norm gap between step and step/2 results
};

/// dS/ds by Richardson-extrapolated central differences over the epoch.
/// Throws DerivativeUnstableError when the step and step/2 estimates disagree
/// by more than 1e-4 relative.
SmatrixDerivative smatrix_derivative(const DrivenPumpModel& model, double s, double E,
                                     double step = 5e-4);

/// Analytic backend: differentiates the Green's-function representation via
/// dH/ds (same contract as smatrix_derivative, no step parameter).
Eigen::MatrixXcd smatrix_derivative_analytic(const DrivenPumpModel& model, double s,
                                             double E);

}  // namespace adiapump
