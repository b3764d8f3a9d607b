#include "adiapump/spectral_density.hpp"

#include <cmath>

#include "adiapump/errors.hpp"
#include "adiapump/quadrature.hpp"

namespace adiapump {

SpectralDensity SpectralDensity::fermi_sea(double mu) {
  SpectralDensity rho;
  rho.jumps.push_back({mu, -1.0});
  return rho;
}

double SpectralDensity::occupancy(double lambda) const {
  // rho(lambda) = -integral of d(rho) over (lambda, infinity)
  double occ = 0.0;
  for (const auto& j : jumps)
    if (j.energy > lambda) occ -= j.weight;
  if (smooth) {
    const double lo = std::max(lambda, smooth->support_lo);
    if (lo < smooth->support_hi)
      occ -= gl_integrate(smooth->density, lo, smooth->support_hi, 64);
  }
  return occ;
}

double SpectralDensity::total_variation() const {
  double tv = 0.0;
  for (const auto& j : jumps) tv += std::abs(j.weight);
  if (smooth)
    tv += gl_integrate([&](double E) { return std::abs(smooth->density(E)); },
                       smooth->support_lo, smooth->support_hi, 64);
  return tv;
}

void SpectralDensity::validate(double band_guard) const {
  const double lo = band_guard, hi = 4.0 - band_guard;
  for (const auto& j : jumps)
    if (!(j.energy > lo && j.energy < hi))
      throw ModelInvalidError("spectral density: jump outside the open band");
  if (smooth) {
    if (!(smooth->support_lo > lo && smooth->support_hi < hi &&
          smooth->support_lo < smooth->support_hi))
      throw ModelInvalidError("spectral density: smooth support outside the open band");
  }
  if (!std::isfinite(total_variation()))
    throw ModelInvalidError("spectral density: total variation not finite");
}

}  // namespace adiapump
