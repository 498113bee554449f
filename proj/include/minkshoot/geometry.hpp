#pragma once

#include <cmath>
#include <stdexcept>

namespace minkshoot {

// Radial domain: the ball of radius R2 when R1 == 0, the annulus (R1, R2)
// otherwise. dim_N is the ambient space dimension N >= 1.
struct Geometry {
  int dim_N;
  double R1;
  double R2;

  Geometry(int n, double r1, double r2) : dim_N(n), R1(r1), R2(r2) {
    if (n < 1) throw std::invalid_argument("Geometry: dim_N must be >= 1");
    if (!std::isfinite(r1) || !std::isfinite(r2) || !(r1 >= 0.0) || !(r2 > r1))
      throw std::invalid_argument("Geometry: radii must satisfy 0 <= R1 < R2 < inf");
  }

  bool is_ball() const noexcept { return R1 == 0.0; }

  double width() const noexcept { return R2 - R1; }

  // r^{N-1}, the radial volume weight. Integer exponent, so plain repeated
  // multiplication is exact enough and cheap.
  double rpow(double r) const noexcept {
    double w = 1.0;
    for (int i = 1; i < dim_N; ++i) w *= r;
    return w;
  }
};

inline Geometry ball(int dim_N, double R2) { return Geometry(dim_N, 0.0, R2); }

inline Geometry annulus(int dim_N, double R1, double R2) {
  if (!(R1 > 0.0)) throw std::invalid_argument("annulus: R1 must be positive (use ball)");
  return Geometry(dim_N, R1, R2);
}

}  // namespace minkshoot
