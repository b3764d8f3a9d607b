#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "adiapump/current_operator.hpp"
#include "adiapump/ensemble.hpp"
#include "adiapump/pump_model.hpp"
#include "adiapump/spectral_density.hpp"

namespace adiapump {

/// Run parameters for one adiabatic propagation. Lab time is t = s/eps; the
/// lattice group velocity is bounded by 2, so hard-wall leads of length
///   L >= ammeter span + 2 * lab duration + margin
/// guarantee no far-wall reflection reaches any ammeter during the run.
struct PropagationPlan {
  double eps = 0.04;
  double dt_lab = 0.05;
  double s0 = 0.0;
  double s1 = 1.0;                       // end of driving (one cycle)
  double s_end = 0.0;                    // end of measurement window (>= s1)
  std::vector<double> measurement_epochs;
  int lead_length = 0;
  double ammeter = 30.0;                 // largest ammeter position in sites
  double switch_width = 5.0;
  double margin = 50.0;

  double lab_duration() const { return (s_end - s0) / eps; }
  int steps() const;

  /// Auto plan: one driving cycle [0, 1] plus a frozen tail long enough for
  /// packets emitted at the band center (speed 2) to clear the farthest
  /// ammeter, lead length from the travel bound, ~n_epochs measurement epochs.
  static PropagationPlan make_auto(double eps, double ammeter_max, double switch_width,
                                   double cycle_end = 1.0, int n_epochs = 800,
                                   double tail_factor = 1.6);

  /// Throws PlanViolationError if the truncation bound is not met.
  void validate() const;
};

/// Unitary midpoint (Cayley) step through the non-autonomous dynamics
/// i eps d/ds psi = H(s) psi, i.e. one lab-time step dt with H(s_mid).
/// The observer is called at every measurement epoch with the current epoch
/// and the propagated ensemble (orbitals mutated in place).
void propagate(OrbitalEnsemble& ensemble, const DrivenPumpModel& model,
               const PropagationPlan& plan,
               const std::function<void(double, const OrbitalEnsemble&)>& observer = {});

/// Convenience form returning snapshots at the plan's measurement epochs.
std::vector<OrbitalEnsemble> propagate_snapshots(const OrbitalEnsemble& initial,
                                                 const DrivenPumpModel& model,
                                                 const PropagationPlan& plan);

struct ChargeTrace {
  std::vector<double> s;                  // measurement epochs (incl. s0)
  Eigen::MatrixXd raw;                    // eps^-1 <I_j>(s), one row per epoch
  Eigen::MatrixXd subtracted;             // raw minus equilibrium baseline
  Eigen::VectorXd baseline;               // eps^-1 tr(rho(H_-) I_j), constant
  Eigen::VectorXd cycle_total;            // per-operator transported charge
  Eigen::VectorXd cycle_total_trace;      // trapezoid over the recorded trace
  double norm_drift = 0.0;
};

/// Propagates rho(H_-) through the plan and measures every supplied current
/// operator. Cycle totals are the telescoped box-charge differences
/// <Q>_end - <Q>_start - T <I>_eq (the exact time integral of the current
/// through the discrete flow); the trapezoid of the recorded epoch trace is
/// kept alongside as a consistency diagnostic.
ChargeTrace measure_pumped_charge(const DrivenPumpModel& model, const SpectralDensity& rho,
                                  const PropagationPlan& plan,
                                  const std::vector<CurrentOperator>& ops);

}  // namespace adiapump
