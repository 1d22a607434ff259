#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eprsim {

// How the measurement interaction couples the spin to the pointer. The two
// modes differ in which angular settings label physically distinct
// experiments: an ideal impulsive coupling distinguishes settings that differ
// by pi, a Stern-Gerlach magnet does not.
enum class InteractionMode { VonNeumann, SternGerlach };

inline constexpr double kPi = std::numbers::pi_v<double>;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Reduce a measurement angle to the canonical representative of its
/// physical equivalence class. Von Neumann mode: identity. Stern-Gerlach
/// mode: reduce mod pi into (-pi/2, +pi/2].
inline double canonicalize_angle(double theta, InteractionMode mode) {
  if (!std::isfinite(theta)) throw std::invalid_argument("angle must be finite");
  if (mode == InteractionMode::VonNeumann) return theta;
  double k = std::ceil((theta - kPi / 2) / kPi);
  double r = theta - k * kPi;
  if (r <= -kPi / 2) r += kPi;  // rounding guard at the half-open boundary
  if (r > kPi / 2) r -= kPi;
  return r;
}

}  // namespace eprsim
