#pragma once

#include <cmath>

namespace adiapump {

/// Quintic smoothstep on [0,1]: q(0)=0, q(1)=1, q'=q''=0 at both ends.
inline double quintic01(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

inline double dquintic01(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double u = 1.0 - t;
  return 30.0 * t * t * u * u;
}

/// Antiderivative of quintic01 with I(0)=0; I(1)=1/2.
inline double iquintic01(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return t - 0.5;
  return t * t * t * t * (2.5 + t * (-3.0 + t));
}

/// C-infinity step on [0,1] built from exp(-1/t); used where Chebyshev
/// approximations need fast coefficient decay.
inline double smoothstep_cinf(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

}  // namespace adiapump
