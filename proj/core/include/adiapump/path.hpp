#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace adiapump {

/// One additive term of a path component, evaluated at the cycle phase phi.
struct PathTerm {
  enum class Type { Const, Trig, Pulse };
  Type type = Type::Const;
  double value = 0.0;      // Const
  int harmonic = 1;        // Trig: amplitude*cos(2*pi*harmonic*phi + phase)
  double amplitude = 0.0;  // Trig / Pulse
  double phase = 0.0;      // Trig
  double t_on = 0.0;       // Pulse: rises at t_on, falls at t_off (phase units)
  double t_off = 0.0;
  double rise = 0.1;       // Pulse edge width; edges are quintic smoothsteps

  double eval(double phi) const;
  double deriv(double phi) const;  // d/dphi
};

/// Smooth driving protocol theta(s) in R^p.
///
/// Kinds:
///  - Static:  theta(s) = theta(0); trivially flat before zero.
///  - Cycle:   components are sums of PathTerms evaluated at a cycle phase
///             phi(s) which is 0 for s<=0, advances by 1 per period with
///             quintic-smoothstep edges of width `edge` (period fraction)
///             and a constant-rate plateau in between, and optionally
///             saturates after `turns` full turns. C^2 in s everywhere.
///  - RawTrig: components evaluated at phi = s/period with no staircase;
///             NOT flat before zero (exists for derivative cross-checks).
class ParameterPath {
 public:
  enum class Kind { Static, Cycle, RawTrig };

  ParameterPath() = default;
  static ParameterPath make_static(const Eigen::VectorXd& theta0);
  static ParameterPath make_cycle(std::vector<std::vector<PathTerm>> components,
                                  double period, double edge,
                                  std::optional<int> turns);
  static ParameterPath make_raw_trig(std::vector<std::vector<PathTerm>> components,
                                     double period);

  int dimension() const { return static_cast<int>(components_.size()); }
  Eigen::VectorXd evaluate(double s) const;
  Eigen::VectorXd derivative(double s) const;
  bool flat_before_zero() const { return kind_ != Kind::RawTrig; }
  std::optional<double> period() const;
  Kind kind() const { return kind_; }
  double edge() const { return edge_; }
  std::optional<int> turns() const { return turns_; }
  const std::vector<std::vector<PathTerm>>& components() const { return components_; }

  /// Cycle phase and its s-derivative (Static: both zero).
  std::pair<double, double> phase(double s) const;

 private:
  Kind kind_ = Kind::Static;
  std::vector<std::vector<PathTerm>> components_;
  Eigen::VectorXd theta0_;
  double period_ = 1.0;
  double edge_ = 0.2;
  std::optional<int> turns_;
};

}  // namespace adiapump
