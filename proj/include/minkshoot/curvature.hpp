#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace minkshoot {

// Largest double strictly below 1; phi_inv clamps to it so derived slopes
// stay inside the open interval (-1, 1) no matter how large |t| gets.
inline constexpr double slope_bound = 1.0 - std::numeric_limits<double>::epsilon() / 2;

// phi(s) = s / sqrt(1 - s^2). The factored radicand (1-s)(1+s) keeps
// precision when |s| is within a few ulps of the barrier.
inline double phi(double s) {
  if (!(std::fabs(s) < 1.0))
    throw std::domain_error("phi: |s| >= 1, slope barrier crossed upstream");
  return s / std::sqrt((1.0 - s) * (1.0 + s));
}

// phi_inv(t) = t / sqrt(1 + t^2), total on the reals, image in (-1, 1).
// For |t| >= 1e150 the quotient is 1 to the last bit anyway and t*t would
// overflow, so the clamp value is returned directly.
inline double phi_inv(double t) noexcept {
  if (std::fabs(t) < 1e150) {
    double s = t / std::sqrt(1.0 + t * t);
    if (s > slope_bound) return slope_bound;
    if (s < -slope_bound) return -slope_bound;
    return s;
  }
  if (std::isnan(t)) return t;
  return t > 0.0 ? slope_bound : -slope_bound;
}

}  // namespace minkshoot
