#pragma once

#include "adiapump/smoothstep.hpp"

namespace adiapump {

/// Smooth monotone 0 -> 1 step: raw profile is 0 for alpha <= -1 and 1 for
/// alpha >= 1 (quintic smoothstep in between, C^2); `at` rescales distances
/// by the width, so the ramp occupies [-width, width] around the offset.
struct SwitchFunction {
  double width = 4.0;

  static double raw(double alpha) { return quintic01((alpha + 1.0) / 2.0); }
  double at(double distance) const { return raw(distance / width); }
};

}  // namespace adiapump
