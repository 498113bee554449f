#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "curvature.hpp"
#include "dopri5.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "nonlinearity.hpp"

namespace minkshoot {

// Shooting system in the (u, v) variables, v = r^{N-1} phi(u'):
//   u' = phi_inv(v / r^{N-1}),  v' = -r^{N-1} f_hat(u).
// The origin is never passed to this function; ball integrations start from
// the Taylor state at a small positive radius.
inline std::array<double, 2> shooting_rhs(const Geometry& geom, const Nonlinearity& nl,
                                          double r, const std::array<double, 2>& s) {
  if (!(r > 0.0)) throw std::domain_error("shooting_rhs: r must be positive");
  double w = geom.rpow(r);
  return {phi_inv(s[1] / w), -w * f_hat(nl, s[0])};
}

// Taylor state of the regular solution through the singular origin:
//   u(h0) = d - f_hat(d) h0^2 / (2N) + O(h0^4),
//   v(h0) = -f_hat(d) h0^N / N + O(h0^{N+2}),
// consistent with u'(0) = 0.
inline std::array<double, 2> origin_start(const Geometry& geom, const Nonlinearity& nl,
                                          double d, double h0) {
  if (!geom.is_ball())
    throw std::invalid_argument("origin_start: only ball domains start at the origin");
  if (!(d >= 0.0) || !std::isfinite(d))
    throw std::invalid_argument("origin_start: d must be finite and nonnegative");
  if (!(h0 > 0.0)) throw std::invalid_argument("origin_start: h0 must be positive");
  double fd = f_hat(nl, d);
  double n = static_cast<double>(geom.dim_N);
  if (!(std::fabs(fd) * h0 / n < 0.5))
    throw std::invalid_argument("origin_start: h0 too large for |f_hat(d)| h0 / N < 1/2");
  double u = d - fd * h0 * h0 / (2.0 * n);
  double v = -fd * std::pow(h0, n) / n;
  return {u, v};
}

// Dense numerical solution of the shooting Cauchy problem on [R1, R2].
// samples: one row per accepted step; the first is (R1, d, 0) and for a ball
// the second is the Taylor state at taylor_h0.
struct Trajectory {
  Geometry geom;
  double d = 0.0;
  double rtol = 0.0;
  std::vector<double> r, u, v, uprime;
  std::vector<DenseStep<2>> dense;  // covers [r_i, r_{i+1}] from the integrator start on
  bool has_taylor = false;
  double taylor_h0 = 0.0;
  double taylor_fd = 0.0;  // f_hat(d) frozen at construction

  Trajectory(const Geometry& g, double d_, double rtol_) : geom(g), d(d_), rtol(rtol_) {}

  std::array<double, 2> eval(double rr) const {
    check_range(rr);
    if (has_taylor && rr < taylor_h0) return taylor_state(rr);
    return dense_at(rr).eval(rr);
  }

  double eval_u(double rr) const { return eval(rr)[0]; }
  double eval_v(double rr) const { return eval(rr)[1]; }

  double eval_uprime(double rr) const {
    check_range(rr);
    if (has_taylor && rr < taylor_h0)
      return phi_inv(-taylor_fd * rr / geom.dim_N);
    if (rr == 0.0) return 0.0;
    return phi_inv(dense_at(rr).eval(rr)[1] / geom.rpow(rr));
  }

  // d/dr of v from the interpolant; used by the equation-residual check.
  double eval_vprime(double rr) const {
    check_range(rr);
    if (has_taylor && rr < taylor_h0) return -taylor_fd * geom.rpow(rr);
    return dense_at(rr).eval_derivative(rr)[1];
  }

private:
  void check_range(double rr) const {
    if (!(rr >= geom.R1) || !(rr <= geom.R2))
      throw std::invalid_argument("Trajectory: evaluation radius outside [R1, R2]");
  }

  std::array<double, 2> taylor_state(double rr) const {
    double n = geom.dim_N;
    return {d - taylor_fd * rr * rr / (2.0 * n), -taylor_fd * std::pow(rr, n) / n};
  }

  const DenseStep<2>& dense_at(double rr) const {
    if (dense.empty()) throw std::logic_error("Trajectory: no dense data");
    auto it = std::upper_bound(dense.begin(), dense.end(), rr,
                               [](double x, const DenseStep<2>& s) { return x < s.r0; });
    if (it != dense.begin()) --it;
    return *it;
  }
};

struct IvpOptions {
  // Veto threshold on |v / r^{N-1}|; far beyond any value a genuine
  // trajectory can reach, so tripping it means the state went rogue.
  double flux_guard = 1e250;
  // Largest phase rotation of (u - s0, -v) allowed in one step, as a
  // fraction of pi; keeps angle unwrapping unambiguous downstream.
  double rotation_guard = 0.49;
  double s0 = 1.0;
};

// Integrates the shooting problem for initial datum d with relative
// tolerance tol. Throws integration_error (with the failure radius) when the
// step controller cannot advance.
inline Trajectory integrate_ivp(const Geometry& geom, const Nonlinearity& nl, double d,
                                double tol, const IvpOptions& opts = {}) {
  if (!(d >= 0.0) || !std::isfinite(d))
    throw std::invalid_argument("integrate_ivp: d must be finite and nonnegative");
  if (!(tol >= 1e-13) || !(tol <= 1e-4))
    throw std::invalid_argument("integrate_ivp: tol must lie in [1e-13, 1e-4]");

  Trajectory traj(geom, d, tol);
  double s0 = opts.s0;

  double r_start = geom.R1;
  std::array<double, 2> y_start{d, 0.0};
  traj.r.push_back(geom.R1);
  traj.u.push_back(d);
  traj.v.push_back(0.0);

  if (geom.is_ball()) {
    double n = geom.dim_N;
    double fd = f_hat(nl, d);
    double h0 = std::fmax(1e-8 * geom.R2, 1e-2 * std::cbrt(tol) * geom.R2);
    if (fd != 0.0) h0 = std::fmin(h0, 0.25 * n / std::fabs(fd));
    y_start = origin_start(geom, nl, d, h0);
    r_start = h0;
    traj.has_taylor = true;
    traj.taylor_h0 = h0;
    traj.taylor_fd = fd;
    traj.r.push_back(h0);
    traj.u.push_back(y_start[0]);
    traj.v.push_back(y_start[1]);
  }

  IntegrationControl<2> ctl;
  ctl.rtol = tol;
  ctl.atol = 1e-14 * std::fmax(1.0, d);
  ctl.h_init = geom.is_ball() ? r_start : 1e-3 * geom.width();
  ctl.underflow_floor = 1e-14 * geom.width();
  double flux_guard = opts.flux_guard;
  double cross_cap = std::tan(opts.rotation_guard * 3.14159265358979323846);
  ctl.step_veto = [&geom, s0, flux_guard, cross_cap](double, const std::array<double, 2>& y0,
                                                     double r1, const std::array<double, 2>& y1) {
    if (!std::isfinite(y1[0]) || !std::isfinite(y1[1])) return false;
    if (std::fabs(y1[1]) > flux_guard * geom.rpow(r1)) return false;
    double x0 = y0[0] - s0, z0 = -y0[1];
    double x1 = y1[0] - s0, z1 = -y1[1];
    double dot = x0 * x1 + z0 * z1;
    double cross = x0 * z1 - z0 * x1;
    if (dot <= 0.0 && (cross != 0.0 || dot < 0.0)) return false;
    return std::fabs(cross) <= cross_cap * dot || (cross == 0.0 && dot == 0.0);
  };

  auto result = integrate_dopri5<2>(
      [&geom, &nl](double r, const std::array<double, 2>& s) {
        return shooting_rhs(geom, nl, r, s);
      },
      r_start, geom.R2, y_start, ctl);

  for (std::size_t i = 1; i < result.r.size(); ++i) {
    traj.r.push_back(result.r[i]);
    traj.u.push_back(result.y[i][0]);
    traj.v.push_back(result.y[i][1]);
  }
  traj.dense = std::move(result.dense);

  traj.uprime.resize(traj.r.size());
  for (std::size_t i = 0; i < traj.r.size(); ++i) {
    double rr = traj.r[i];
    if (rr == 0.0)
      traj.uprime[i] = 0.0;
    else
      traj.uprime[i] = phi_inv(traj.v[i] / geom.rpow(rr));
  }

  // A priori bound |u| <= d + (R2 - R1); violation means the integration is
  // not tracking a genuine solution.
  double bound = d + geom.width() + 1e-9 * (1.0 + d);
  for (double uu : traj.u)
    if (!(std::fabs(uu) <= bound))
      throw contract_violation_error("integrate_ivp: a priori bound on |u| violated");

  return traj;
}

}  // namespace minkshoot
