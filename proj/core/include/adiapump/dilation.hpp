#pragma once

#include <Eigen/Core>

#include "adiapump/pump_model.hpp"
#include "adiapump/smoothstep.hpp"

namespace adiapump {

/// Velocity profile for exterior scaling: v(x) = 0 up to ramp_start, v(x) = x
/// beyond ramp_end, v(x) = x * smoothstep in between; v' >= 0 everywhere.
struct VProfile {
  double ramp_start = 6.0;
  double ramp_end = 16.0;

  double operator()(double x) const {
    return x * quintic01((x - ramp_start) / (ramp_end - ramp_start));
  }
};

/// Generator of exterior scaling A = (1/2i)(d/dx v + v d/dx), discretized with
/// the antisymmetric central difference. Zero on the pump block and block
/// diagonal over the leads, so [A, Pi_j] = 0 exactly.
SparseCplx exterior_scaling_generator(const LatticeGeometry& geometry, const VProfile& v);

/// Lead-block of A (the L x L tridiagonal Hermitian piece, identical for all
/// leads since the profile depends only on the distance from the attachment).
Eigen::MatrixXcd exterior_scaling_lead_block(int lead_length, const VProfile& v);

}  // namespace adiapump
