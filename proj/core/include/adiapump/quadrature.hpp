#pragma once

#include <functional>
#include <vector>

namespace adiapump {

/// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
  explicit GaussLegendre(int order);
};

/// Integral of f over [a, b] at the given order.
double gl_integrate(const std::function<double(double)>& f, double a, double b, int order);

/// Order-doubling estimate: integral at 2*order plus |difference| to order.
struct GlResult {
  double value = 0.0;
  double error_estimate = 0.0;
};
GlResult gl_integrate_doubling(const std::function<double(double)>& f, double a, double b,
                               int order);

}  // namespace adiapump
