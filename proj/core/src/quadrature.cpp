#include "adiapump/quadrature.hpp"

#include <cmath>

#include "adiapump/errors.hpp"

namespace adiapump {

// Newton iteration on Legendre polynomials from Chebyshev initial guesses.
GaussLegendre::GaussLegendre(int order) {
  if (order < 1) throw Error("GaussLegendre: order must be >= 1");
  const int n = order;
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int order) {
  const GaussLegendre gl(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < order; ++i) acc += gl.weights[i] * f(mid + half * gl.nodes[i]);
  return acc * half;
}

GlResult gl_integrate_doubling(const std::function<double(double)>& f, double a, double b,
                               int order) {
  const double coarse = gl_integrate(f, a, b, order);
  const double fine = gl_integrate(f, a, b, 2 * order);
  return {fine, std::abs(fine - coarse)};
}

}  // namespace adiapump
