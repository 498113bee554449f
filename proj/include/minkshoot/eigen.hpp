#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dopri5.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "nonlinearity.hpp"
#include "polar.hpp"

namespace minkshoot {

// One trial of the eigen angle ODE
//   theta' = sin^2(theta)/r^{N-1} + mu r^{N-1} cos^2(theta),  theta(R1) = 0.
// theta(R2) is continuous and strictly increasing in mu; eigenvalues are the
// mu where it hits a multiple of pi.
struct AngleShot {
  double mu = 0.0;
  double theta_end = 0.0;
  double tol = 0.0;
};

namespace detail {

inline double eigen_ode_rtol(double tol) {
  return std::clamp(1e-2 * tol, 1e-13, 1e-6);
}

}  // namespace detail

inline double theta_mu_at_R2(const Geometry& geom, double mu, double tol = 1e-10) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("theta_mu_at_R2: mu must be finite and nonnegative");
  if (mu == 0.0) return 0.0;  // theta == 0 solves the ODE exactly

  double rtol = detail::eigen_ode_rtol(tol);
  double r_start = geom.R1;
  double th_start = 0.0;
  if (geom.is_ball()) {
    // Taylor start: theta(r) = mu r^N / N + O(r^{N+2}); h0 keeps the
    // truncation well under the integration tolerance.
    double n = geom.dim_N;
    double h0 = std::pow(1e-2 * rtol * n * n * (n + 2.0) / (mu * mu), 1.0 / (n + 2.0));
    h0 = std::clamp(h0, 1e-12 * geom.R2, 1e-2 * geom.R2);
    r_start = h0;
    th_start = mu * std::pow(h0, n) / n;
  }

  IntegrationControl<1> ctl;
  ctl.rtol = rtol;
  ctl.atol = 1e-14;
  ctl.underflow_floor = 1e-14 * geom.width();
  ctl.h_init = geom.is_ball() ? std::fmin(r_start, 1e-3 * geom.width())
                              : 1e-3 * geom.width();

  auto result = integrate_dopri5<1>(
      [&geom, mu](double r, const std::array<double, 1>& y) -> std::array<double, 1> {
        double w = geom.rpow(r);
        double s = std::sin(y[0]), c = std::cos(y[0]);
        return {s * s / w + mu * w * c * c};
      },
      r_start, geom.R2, {th_start}, ctl);

  return result.y.back()[0];
}

inline AngleShot angle_shot(const Geometry& geom, double mu, double tol = 1e-10) {
  return {mu, theta_mu_at_R2(geom, mu, tol), tol};
}

// k-th radial Neumann eigenvalue. k = 1 is the constant eigenfunction with
// eigenvalue 0; for k >= 2 the unique mu with theta_mu(R2) = (k-1) pi is
// found by exponential bracket growth and bisection (monotonicity in mu).
inline double eigenvalue(const Geometry& geom, int k, double tol = 1e-10) {
  if (k < 1) throw std::invalid_argument("eigenvalue: k must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("eigenvalue: tol must be positive");
  if (k == 1) return 0.0;

  double target = (k - 1) * pi;
  double lo = 0.0;
  double hi = 1.0;
  while (theta_mu_at_R2(geom, hi, tol) <= target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12)
      throw search_failure_error("eigenvalue: no bracket below mu = 1e12");
  }
  for (int it = 0; it < 200 && hi - lo > tol * std::fmax(1.0, 0.5 * (hi + lo)); ++it) {
    double mid = 0.5 * (lo + hi);
    if (theta_mu_at_R2(geom, mid, tol) > target)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// lambda_1 .. lambda_kmax in increasing order.
inline std::vector<double> radial_spectrum(const Geometry& geom, int kmax,
                                           double tol = 1e-10) {
  if (kmax < 1) throw std::invalid_argument("radial_spectrum: kmax must be >= 1");
  std::vector<double> lam;
  lam.reserve(kmax);
  for (int k = 1; k <= kmax; ++k) lam.push_back(eigenvalue(geom, k, tol));
  return lam;
}

struct HypothesisCheck {
  bool holds = false;
  double margin = 0.0;       // f'(s0) - lambda_{k+1}
  double lambda_next = 0.0;  // lambda_{k+1}
};

// Existence hypothesis for k solution pairs: f'(s0) > lambda_{k+1}.
inline HypothesisCheck check_hypothesis(const Geometry& geom, const Nonlinearity& nl,
                                        int k, double tol = 1e-10) {
  if (k < 1) throw std::invalid_argument("check_hypothesis: k must be >= 1");
  HypothesisCheck out;
  out.lambda_next = eigenvalue(geom, k + 1, tol);
  double fp = f_prime_at_s0(nl);
  out.margin = fp - out.lambda_next;
  out.holds = fp > out.lambda_next;
  return out;
}

}  // namespace minkshoot
