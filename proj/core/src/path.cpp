#include "adiapump/path.hpp"

#include <cmath>

#include "adiapump/errors.hpp"
#include "adiapump/smoothstep.hpp"

namespace adiapump {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Per-period phase profile: quintic ramps of width `edge` at both ends of the
// period and a constant-rate plateau, normalized so one period advances the
// phase by exactly 1.
void plateau_profile(double frac, double edge, double& p, double& dp) {
  const double h = 1.0 / (1.0 - edge);
  if (frac < edge) {
    p = h * edge * iquintic01(frac / edge);
    dp = h * quintic01(frac / edge);
  } else if (frac <= 1.0 - edge) {
    p = h * (edge / 2.0 + frac - edge);
    dp = h;
  } else {
    p = 1.0 - h * edge * iquintic01((1.0 - frac) / edge);
    dp = h * quintic01((1.0 - frac) / edge);
  }
}
}  // namespace

double PathTerm::eval(double phi) const {
  switch (type) {
    case Type::Const:
      return value;
    case Type::Trig:
      return amplitude * std::cos(kTwoPi * harmonic * phi + phase);
    case Type::Pulse:
      return amplitude * (quintic01((phi - t_on) / rise) - quintic01((phi - t_off) / rise));
  }
  return 0.0;
}

double PathTerm::deriv(double phi) const {
  switch (type) {
    case Type::Const:
      return 0.0;
    case Type::Trig:
      return -amplitude * kTwoPi * harmonic * std::sin(kTwoPi * harmonic * phi + phase);
    case Type::Pulse:
      return amplitude / rise *
             (dquintic01((phi - t_on) / rise) - dquintic01((phi - t_off) / rise));
  }
  return 0.0;
}

ParameterPath ParameterPath::make_static(const Eigen::VectorXd& theta0) {
  ParameterPath p;
  p.kind_ = Kind::Static;
  p.theta0_ = theta0;
  p.components_.resize(theta0.size());
  for (int i = 0; i < theta0.size(); ++i)
    p.components_[i] = {PathTerm{.type = PathTerm::Type::Const, .value = theta0(i)}};
  return p;
}

ParameterPath ParameterPath::make_cycle(std::vector<std::vector<PathTerm>> components,
                                        double period, double edge,
                                        std::optional<int> turns) {
  if (period <= 0.0) throw ModelInvalidError("path: period must be positive");
  if (edge <= 0.0 || edge > 0.5) throw ModelInvalidError("path: edge must be in (0, 0.5]");
  if (turns && *turns < 1) throw ModelInvalidError("path: turns must be >= 1");
  ParameterPath p;
  p.kind_ = Kind::Cycle;
  p.components_ = std::move(components);
  p.period_ = period;
  p.edge_ = edge;
  p.turns_ = turns;
  return p;
}

ParameterPath ParameterPath::make_raw_trig(std::vector<std::vector<PathTerm>> components,
                                           double period) {
  if (period <= 0.0) throw ModelInvalidError("path: period must be positive");
  ParameterPath p;
  p.kind_ = Kind::RawTrig;
  p.components_ = std::move(components);
  p.period_ = period;
  return p;
}

std::pair<double, double> ParameterPath::phase(double s) const {
  if (kind_ == Kind::Static) return {0.0, 0.0};
  if (kind_ == Kind::RawTrig) return {s / period_, 1.0 / period_};
  const double u = s / period_;
  if (u <= 0.0) return {0.0, 0.0};
  const double base = std::floor(u);
  double p, dp;
  plateau_profile(u - base, edge_, p, dp);
  double phi = base + p;
  double dphi = dp / period_;
  if (turns_ && phi >= static_cast<double>(*turns_)) {
    phi = static_cast<double>(*turns_);
    dphi = 0.0;
  }
  return {phi, dphi};
}

Eigen::VectorXd ParameterPath::evaluate(double s) const {
  const auto [phi, dphi] = phase(s);
  (void)dphi;
  Eigen::VectorXd th(dimension());
  for (int i = 0; i < dimension(); ++i) {
    double v = 0.0;
    for (const auto& t : components_[i]) v += t.eval(phi);
    th(i) = v;
  }
  return th;
}

Eigen::VectorXd ParameterPath::derivative(double s) const {
  const auto [phi, dphi] = phase(s);
  Eigen::VectorXd dth = Eigen::VectorXd::Zero(dimension());
  if (dphi == 0.0) return dth;
  for (int i = 0; i < dimension(); ++i) {
    double v = 0.0;
    for (const auto& t : components_[i]) v += t.deriv(phi);
    dth(i) = v * dphi;
  }
  return dth;
}

std::optional<double> ParameterPath::period() const {
  if (kind_ == Kind::Static) return std::nullopt;
  return period_;
}

}  // namespace adiapump
