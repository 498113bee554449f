#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "ivp.hpp"

namespace minkshoot {

inline constexpr double pi = 3.14159265358979323846;

// Scaled polar view of a trajectory around the equilibrium (s0, 0):
//   u - s0 = rho cos(theta),  v = -alpha rho sin(theta),
// with theta unwrapped to a continuous, non-decreasing angle.
struct PolarPath {
  double alpha = 1.0;
  double s0 = 1.0;
  std::vector<double> r, theta, rho;  // aligned with the trajectory samples

  double theta_start() const { return theta.front(); }
  double theta_end() const { return theta.back(); }
  double winding() const { return std::fmax(0.0, theta.back() - theta.front()); }
  int half_turns() const { return static_cast<int>(std::floor(winding() / pi)); }
};

// Converts samples to the unwrapped angle. Increments are recovered per
// step from the rotation of the phase vector and must stay below pi/2 in
// magnitude (the integrator's rotation guard provides this).
inline PolarPath to_polar(const Trajectory& traj, double s0, double alpha = 1.0) {
  if (!(alpha > 0.0)) throw std::invalid_argument("to_polar: alpha must be positive");
  if (traj.d == s0)
    throw degenerate_path_error("to_polar: initial datum sits on the equilibrium");

  PolarPath path;
  path.alpha = alpha;
  path.s0 = s0;
  std::size_t n = traj.r.size();
  path.r = traj.r;
  path.theta.resize(n);
  path.rho.resize(n);

  double xp = 0.0, zp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = traj.u[i] - s0;
    // +0.0 keeps atan2 on the upper branch so theta(R1) = pi (not -pi)
    // on the below side, where v vanishes with u - s0 < 0.
    double z = traj.v[i] == 0.0 ? 0.0 : -traj.v[i] / alpha;
    double rho = std::hypot(x, z);
    if (rho == 0.0)
      throw degenerate_path_error("to_polar: rho vanished along the path");
    path.rho[i] = rho;
    if (i == 0) {
      path.theta[0] = std::atan2(z, x);
    } else {
      double cross = xp * z - zp * x;
      double dot = xp * x + zp * z;
      double delta = std::atan2(cross, dot);
      if (!(std::fabs(delta) < pi / 2 + 1e-9))
        throw contract_violation_error("to_polar: step rotation of pi/2 or more");
      if (delta < -1e-9)
        throw contract_violation_error("to_polar: unwrapped angle decreased");
      path.theta[i] = path.theta[i - 1] + delta;
    }
    xp = x;
    zp = z;
  }
  return path;
}

// Total angle swept over [R1, R2] with the canonical alpha = 1.
inline double winding(const Trajectory& traj, double s0) {
  return to_polar(traj, s0, 1.0).winding();
}

// floor(winding / pi); independent of alpha.
inline int half_turns(const Trajectory& traj, double s0) {
  return to_polar(traj, s0, 1.0).half_turns();
}

struct CrossingReport {
  int count = 0;
  std::vector<double> radii;  // linear-in-theta estimates between samples
  bool tie_warning = false;   // theta end within 1e-12 of a half-integer level
};

// Interior crossings of u = s0 are the half-integer angle levels
// (m + 1/2) pi passed strictly between theta_start and theta_end.
inline CrossingReport crossing_report(const PolarPath& path) {
  CrossingReport rep;
  double ts = path.theta_start();
  double te = path.theta_end();
  double m_first = std::ceil(ts / pi - 0.5 + 1e-300);
  for (double m = m_first;; m += 1.0) {
    double level = (m + 0.5) * pi;
    if (!(level > ts)) continue;
    if (!(level < te)) break;
    ++rep.count;
    // locate the sample interval containing the level; theta is monotone
    std::size_t lo = 0, hi = path.theta.size() - 1;
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      if (path.theta[mid] <= level)
        lo = mid;
      else
        hi = mid;
    }
    double t0 = path.theta[lo], t1 = path.theta[hi];
    double frac = t1 > t0 ? (level - t0) / (t1 - t0) : 0.5;
    rep.radii.push_back(path.r[lo] + frac * (path.r[hi] - path.r[lo]));
  }
  double near = std::round(te / pi - 0.5);
  if (std::fabs(te - (near + 0.5) * pi) <= 1e-12) rep.tie_warning = true;
  return rep;
}

// Crossing count straight from a trajectory, canonical alpha.
inline int crossing_count(const Trajectory& traj, double s0) {
  return crossing_report(to_polar(traj, s0, 1.0)).count;
}

}  // namespace minkshoot
