#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace adiapump {

/// The variation d(rho) of a bounded-variation occupation function, realized
/// as point masses plus an absolutely continuous part with compact support
/// strictly inside the lead band (0, 4).
///
/// A Fermi sea rho(lambda) = theta(mu - lambda) is the single jump (mu, -1).
struct SpectralDensity {
  struct Jump {
    double energy = 0.0;
    double weight = 0.0;
  };
  struct SmoothPart {
    std::function<double(double)> density;  // rho'(E)
    double support_lo = 0.0;
    double support_hi = 0.0;
  };

  std::vector<Jump> jumps;
  std::optional<SmoothPart> smooth;

  static SpectralDensity fermi_sea(double mu);

  /// Occupation rho(lambda) reconstructed from the variation with the
  /// convention rho(+infinity) = 0 (states far above every jump are empty).
  double occupancy(double lambda) const;

  double total_variation() const;
  bool empty() const { return jumps.empty() && !smooth; }

  /// Enforces supports strictly inside (band_guard, 4 - band_guard) and
  /// finite total variation. Throws ModelInvalidError.
  void validate(double band_guard = 1e-6) const;
};

}  // namespace adiapump
