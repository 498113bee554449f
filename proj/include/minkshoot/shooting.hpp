#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curvature.hpp"
#include "eigen.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "ivp.hpp"
#include "nonlinearity.hpp"
#include "parallel.hpp"
#include "polar.hpp"

namespace minkshoot {

// Which side of the trivial height s0 the shot starts on.
enum class Side { below, above };

inline const char* side_name(Side s) { return s == Side::below ? "below" : "above"; }

// Angle a shot must reach at R2 to produce exactly j interior crossings:
// shots from below start at theta = pi, shots from above at theta = 0.
inline double target_angle(Side side, int j) {
  return (side == Side::below ? j + 1 : j) * pi;
}

// Largest shooting height that can stay below the gradient blowup barrier:
// |u'| < 1 forces |u(r) - d| < r - R1, so d > s0 + (R2 - R1) cannot reach s0.
inline double d_star(const Geometry& geom, const Nonlinearity& nl) {
  return nl.s0 + geom.width();
}

struct ShotResult {
  double d = 0.0;
  double theta_start = 0.0;
  double theta_end = 0.0;
  int half_turns = 0;
  std::shared_ptr<const Trajectory> traj;
  bool ok = true;
  double fail_radius = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

struct SolutionProfile {
  double d = 0.0;
  Side side = Side::below;
  int crossings = 0;
  double endpoint_residual = 0.0;  // |v(R2)|
  double min_u = 0.0;
  double max_u = 0.0;
  double max_slope = 0.0;
  std::shared_ptr<const Trajectory> traj;
  std::shared_ptr<const PolarPath> polar;
};

struct TargetFailure {
  Side side = Side::below;
  int crossings = 0;
  std::string reason;
};

struct SolveResult {
  int k = 0;
  std::vector<double> spectrum;  // lambda_1 .. lambda_{k+1}
  std::vector<SolutionProfile> profiles;
  std::vector<TargetFailure> failures;
  std::vector<ShotResult> scan_below;
  std::vector<ShotResult> scan_above;
};

// Thrown when some targets could not be matched; carries everything that was
// found so callers can still report the partial result.
class incomplete_solve_error : public std::runtime_error {
 public:
  incomplete_solve_error(const std::string& what, SolveResult result)
      : std::runtime_error(what), result_(std::move(result)) {}
  const SolveResult& result() const noexcept { return result_; }

 private:
  SolveResult result_;
};

struct SolveOptions {
  const std::vector<double>* spectrum = nullptr;  // reuse if already computed
  int scan_points = 256;
  double beyond_dstar = 1.0;  // above-side scan ceiling as a multiple of d* - s0
  bool keep_scan_trajectories = false;
  int jobs = 1;
};

namespace detail {

inline std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Sign-change brackets of g(d) = theta_end(d) - target over consecutive ok
// shots; a grid point landing on the target brackets both neighbors.
inline std::vector<std::pair<double, double>> extract_brackets(
    const std::vector<ShotResult>& sc, double target) {
  std::vector<std::pair<double, double>> brackets;
  for (std::size_t i = 0; i + 1 < sc.size(); ++i) {
    if (!sc[i].ok || !sc[i + 1].ok) continue;
    double ga = sc[i].theta_end - target;
    double gb = sc[i + 1].theta_end - target;
    if (std::abs(ga) <= 1e-12) {
      if (i > 0 && sc[i - 1].ok) brackets.emplace_back(sc[i - 1].d, sc[i].d);
      brackets.emplace_back(sc[i].d, sc[i + 1].d);
      continue;
    }
    if (std::abs(gb) <= 1e-12) continue;  // picked up as ga next step
    if (ga * gb < 0.0) brackets.emplace_back(sc[i].d, sc[i + 1].d);
  }
  if (sc.size() >= 2 && sc.back().ok && sc[sc.size() - 2].ok &&
      std::abs(sc.back().theta_end - target) <= 1e-12)
    brackets.emplace_back(sc[sc.size() - 2].d, sc.back().d);
  return brackets;
}

}  // namespace detail

// Single shot: integrate from height d and convert to polar form around s0.
inline ShotResult shoot(const Geometry& geom, const Nonlinearity& nl, double d,
                        double tol, const IvpOptions& iv_in = {}) {
  if (!(d >= 0.0) || !std::isfinite(d))
    throw std::invalid_argument("shoot: d must be finite and nonnegative");
  if (d == nl.s0) throw std::invalid_argument("shoot: d must differ from s0");
  IvpOptions iv = iv_in;
  iv.s0 = nl.s0;
  ShotResult out;
  out.d = d;
  auto traj = std::make_shared<Trajectory>(integrate_ivp(geom, nl, d, tol, iv));
  PolarPath p = to_polar(*traj, nl.s0, 1.0);
  out.theta_start = p.theta_start();
  out.theta_end = p.theta_end();
  out.half_turns = p.half_turns();
  out.traj = std::move(traj);
  return out;
}

// Shot that records integration failures instead of throwing.
inline ShotResult try_shoot(const Geometry& geom, const Nonlinearity& nl, double d,
                            double tol, const IvpOptions& iv = {}) {
  try {
    return shoot(geom, nl, d, tol, iv);
  } catch (const integration_error& e) {
    ShotResult out;
    out.d = d;
    out.ok = false;
    out.fail_radius = e.radius();
    out.error = e.what();
    out.theta_start = std::numeric_limits<double>::quiet_NaN();
    out.theta_end = std::numeric_limits<double>::quiet_NaN();
    out.half_turns = -1;
    return out;
  }
}

// Shooting heights for one side: a geometric ladder accumulating toward s0,
// where the winding diverges, plus a uniform fill over the whole admissible
// interval. Both endpoints of the interval are included.
inline std::vector<double> scan_grid(const Geometry& geom, const Nonlinearity& nl,
                                     Side side, int grid_size,
                                     const SolveOptions& opts = {}) {
  if (grid_size < 2) throw std::invalid_argument("scan_grid: grid_size must be >= 2");
  if (!(opts.beyond_dstar > 0.0))
    throw std::invalid_argument("scan_grid: beyond_dstar must be positive");
  double s0 = nl.s0;
  double gap = 1e-6 * s0;
  double lo, hi;
  if (side == Side::below) {
    lo = std::fmin(1e-8, 0.5 * s0);
    hi = s0 - gap;
  } else {
    lo = s0 + gap;
    hi = s0 + geom.width() * opts.beyond_dstar;
  }
  std::vector<double> grid;
  grid.reserve(grid_size + 8);
  if (grid_size > 16) {
    for (double x = gap; static_cast<int>(grid.size()) < grid_size / 2; x *= 1.2) {
      double pt = side == Side::below ? s0 - x : s0 + x;
      if (pt < lo || pt > hi) break;
      grid.push_back(pt);
    }
  }
  int n_uniform = std::max(2, grid_size - static_cast<int>(grid.size()));
  for (int i = 0; i < n_uniform; ++i)
    grid.push_back(lo + (hi - lo) * i / (n_uniform - 1.0));
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  out.reserve(grid.size());
  for (double pt : grid)
    if (out.empty() || pt - out.back() > 1e-12 * s0) out.push_back(pt);
  return out;
}

// Shoots the whole grid; failures are recorded, not fatal. Trajectories are
// dropped by default to keep bulk scans light.
inline std::vector<ShotResult> scan(const Geometry& geom, const Nonlinearity& nl,
                                    Side side, int grid_size, double tol,
                                    const SolveOptions& opts = {}) {
  auto grid = scan_grid(geom, nl, side, grid_size, opts);
  std::vector<ShotResult> out(grid.size());
  parallel_for(grid.size(), opts.jobs, [&](std::size_t i) {
    out[i] = try_shoot(geom, nl, grid[i], tol);
    if (!opts.keep_scan_trajectories) out[i].traj.reset();
  });
  return out;
}

// Bisection on g(d) = theta_end(d) - target over a sign-changing bracket.
// Stops at bracket width tol * max(1, s0) or when |g| <= 1e-12.
inline double refine_root(const Geometry& geom, const Nonlinearity& nl, double d_lo,
                          double d_hi, double target, double tol) {
  if (!(d_lo < d_hi))
    throw std::invalid_argument("refine_root: need d_lo < d_hi");
  double g_lo = shoot(geom, nl, d_lo, tol).theta_end - target;
  if (std::abs(g_lo) <= 1e-12) return d_lo;
  double g_hi = shoot(geom, nl, d_hi, tol).theta_end - target;
  if (std::abs(g_hi) <= 1e-12) return d_hi;
  if (g_lo * g_hi > 0.0)
    throw std::invalid_argument(
        "refine_root: endpoints do not straddle the target angle");
  double width_tol = tol * std::fmax(1.0, nl.s0);
  for (int it = 0; it < 200 && d_hi - d_lo > width_tol; ++it) {
    double mid = 0.5 * (d_lo + d_hi);
    if (mid <= d_lo || mid >= d_hi) break;
    double g_mid = shoot(geom, nl, mid, tol).theta_end - target;
    if (std::abs(g_mid) <= 1e-12) return mid;
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      d_lo = mid;
      g_lo = g_mid;
    } else {
      d_hi = mid;
    }
  }
  return 0.5 * (d_lo + d_hi);
}

// Full profile of a refined root, with extrema sampled through the dense
// interpolant so dips between accepted steps are not missed.
inline SolutionProfile make_profile(const Geometry& geom, const Nonlinearity& nl,
                                    double d, Side side, double tol) {
  ShotResult shot = shoot(geom, nl, d, tol);
  SolutionProfile p;
  p.d = d;
  p.side = side;
  p.traj = shot.traj;
  auto polar = std::make_shared<PolarPath>(to_polar(*shot.traj, nl.s0, 1.0));
  p.crossings = crossing_report(*polar).count;
  p.polar = std::move(polar);
  p.endpoint_residual = std::abs(shot.traj->v.back());
  double mn = shot.traj->u.front(), mx = mn, slope = 0.0;
  for (std::size_t i = 0; i < shot.traj->r.size(); ++i) {
    mn = std::fmin(mn, shot.traj->u[i]);
    mx = std::fmax(mx, shot.traj->u[i]);
    slope = std::fmax(slope, std::abs(shot.traj->uprime[i]));
  }
  const int samples = 4096;
  for (int i = 0; i <= samples; ++i) {
    double r = geom.R1 + geom.width() * i / static_cast<double>(samples);
    mn = std::fmin(mn, shot.traj->eval_u(r));
    mx = std::fmax(mx, shot.traj->eval_u(r));
    slope = std::fmax(slope, std::abs(shot.traj->eval_uprime(r)));
  }
  p.min_u = mn;
  p.max_u = mx;
  p.max_slope = slope;
  return p;
}

// Finds all 2k radial profiles: for each side and each crossing count
// j = 1..k, scans for angle targets, refines brackets, and accepts roots
// that reproduce the crossing count with a small endpoint flux.
inline SolveResult solve_all(const Geometry& geom, const Nonlinearity& nl, int k,
                             double tol, const SolveOptions& opts = {}) {
  if (k < 1) throw std::invalid_argument("solve_all: k must be >= 1");
  if (!(tol >= 1e-13 && tol <= 1e-4))
    throw std::invalid_argument("solve_all: tol must lie in [1e-13, 1e-4]");

  SolveResult res;
  res.k = k;
  if (opts.spectrum && static_cast<int>(opts.spectrum->size()) >= k + 1)
    res.spectrum = *opts.spectrum;
  else
    res.spectrum = radial_spectrum(geom, k + 1);
  double fp = f_prime_at_s0(nl);
  if (!(fp > res.spectrum[k]))
    throw hypothesis_error("solve_all: existence hypothesis fails: f'(s0) = " +
                           detail::fmt_g(fp) + " <= lambda_" + std::to_string(k + 1) +
                           " = " + detail::fmt_g(res.spectrum[k]));

  double tol_refine = std::fmin(tol, 1e-10);
  const double accept_tol = 1e-8;
  res.scan_below = scan(geom, nl, Side::below, opts.scan_points, tol, opts);
  res.scan_above = scan(geom, nl, Side::above, opts.scan_points, tol, opts);

  for (Side side : {Side::below, Side::above}) {
    const auto& sc = side == Side::below ? res.scan_below : res.scan_above;
    for (int j = 1; j <= k; ++j) {
      double target = target_angle(side, j);
      auto brackets = detail::extract_brackets(sc, target);

      std::vector<SolutionProfile> roots;
      std::string reject_reasons;
      for (const auto& [a, b] : brackets) {
        double droot;
        try {
          droot = refine_root(geom, nl, a, b, target, tol_refine);
        } catch (const std::exception& e) {
          reject_reasons += std::string(reject_reasons.empty() ? "" : "; ") + e.what();
          continue;
        }
        SolutionProfile p;
        try {
          p = make_profile(geom, nl, droot, side, tol_refine);
        } catch (const std::exception& e) {
          reject_reasons += std::string(reject_reasons.empty() ? "" : "; ") + e.what();
          continue;
        }
        std::string why;
        double dev = std::fmax(nl.s0 - p.min_u, p.max_u - nl.s0);
        if (p.crossings != j)
          why = "crossing count " + std::to_string(p.crossings) +
                " != " + std::to_string(j) + " at d = " + detail::fmt_g(droot);
        else if (!(p.endpoint_residual <= accept_tol))
          why = "endpoint residual " + detail::fmt_g(p.endpoint_residual) +
                " above " + detail::fmt_g(accept_tol) + " at d = " + detail::fmt_g(droot);
        else if (!(p.min_u > 0.0))
          why = "profile not positive at d = " + detail::fmt_g(droot);
        else if (!(dev > 10.0 * tol))
          why = "profile numerically constant at d = " + detail::fmt_g(droot);
        if (why.empty())
          roots.push_back(std::move(p));
        else
          reject_reasons += std::string(reject_reasons.empty() ? "" : "; ") + why;
      }

      std::sort(roots.begin(), roots.end(),
                [](const SolutionProfile& x, const SolutionProfile& y) {
                  return x.d < y.d;
                });
      std::vector<SolutionProfile> kept;
      for (auto& p : roots) {
        if (!kept.empty() && p.d - kept.back().d < 10.0 * tol) {
          if (p.endpoint_residual < kept.back().endpoint_residual)
            kept.back() = std::move(p);
        } else {
          kept.push_back(std::move(p));
        }
      }
      if (kept.empty()) {
        TargetFailure tf;
        tf.side = side;
        tf.crossings = j;
        tf.reason = brackets.empty() ? "no sign change against the target angle in scan"
                                     : reject_reasons;
        res.failures.push_back(std::move(tf));
      }
      for (auto& p : kept) res.profiles.push_back(std::move(p));
    }
  }

  std::sort(res.profiles.begin(), res.profiles.end(),
            [](const SolutionProfile& x, const SolutionProfile& y) {
              if (x.side != y.side) return x.side == Side::below;
              if (x.crossings != y.crossings) return x.crossings < y.crossings;
              return x.d < y.d;
            });

  if (!res.failures.empty()) {
    // Message built before the move; argument evaluation order is unspecified.
    std::string what = "solve_all: " + std::to_string(res.failures.size()) +
                       " of " + std::to_string(2 * k) + " targets missing";
    throw incomplete_solve_error(what, std::move(res));
  }
  return res;
}

// Crossings recomputed directly from sign changes of u - s0 on a uniform
// refinement of the dense interpolant; exact zeros are skipped.
inline int sign_change_crossings(const Trajectory& traj, double s0, int n = 10000) {
  int count = 0;
  int last = 0;
  for (int i = 0; i < n; ++i) {
    double r = traj.geom.R1 + traj.geom.width() * i / (n - 1.0);
    double w = traj.eval_u(r) - s0;
    int s = (w > 0.0) - (w < 0.0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++count;
    last = s;
  }
  return count;
}

struct VerifyReport {
  double d = 0.0;
  double endpoint_slope = 0.0;     // u'(R2) of the fine rerun
  double endpoint_residual = 0.0;  // |v(R2)| of the fine rerun
  double min_u = 0.0;
  double max_equation_residual = 0.0;  // max |v' + r^{N-1} f(u)| at step midpoints
  double residual_scale = 1.0;
  double sup_distance = 0.0;  // fine rerun vs stored profile
  int crossings_angle = 0;
  int crossings_sign = 0;
  bool positivity_ok = false;
  bool endpoint_ok = false;
  bool residual_ok = false;
  bool crossings_ok = false;
  bool passed = false;
};

// Independent check of a stored profile: re-integrates two orders tighter
// and tests positivity, the Neumann endpoint, the equation residual through
// the interpolant derivative, and crossing-count agreement by two methods.
inline VerifyReport verify_solution(const Geometry& geom, const Nonlinearity& nl,
                                    const SolutionProfile& profile) {
  double base_tol = profile.traj ? profile.traj->rtol : 1e-8;
  double fine_tol = std::fmax(1e-13, 1e-2 * base_tol);
  Trajectory fine = integrate_ivp(geom, nl, profile.d, fine_tol);

  VerifyReport rep;
  rep.d = profile.d;
  rep.endpoint_slope = fine.uprime.back();
  rep.endpoint_residual = std::abs(fine.v.back());

  double mn = fine.u.front();
  const int samples = 4096;
  for (int i = 0; i <= samples; ++i) {
    double r = geom.R1 + geom.width() * i / static_cast<double>(samples);
    mn = std::fmin(mn, fine.eval_u(r));
    if (profile.traj)
      rep.sup_distance = std::fmax(
          rep.sup_distance, std::abs(fine.eval_u(r) - profile.traj->eval_u(r)));
  }
  rep.min_u = mn;

  double resmax = 0.0, scale = 1.0;
  for (const auto& ds : fine.dense) {
    double rm = ds.r0 + 0.5 * ds.h;
    double w = geom.rpow(rm);
    double u_mid = ds.eval(rm)[0];
    double rhs = w * f_hat(nl, u_mid);
    double vp = ds.eval_derivative(rm)[1];
    resmax = std::fmax(resmax, std::abs(vp + rhs));
    scale = std::fmax(scale, std::abs(rhs));
  }
  rep.max_equation_residual = resmax;
  rep.residual_scale = scale;

  try {
    PolarPath p = to_polar(fine, nl.s0, 1.0);
    rep.crossings_angle = crossing_report(p).count;
  } catch (const degenerate_path_error&) {
    rep.crossings_angle = 0;  // constant profile never meets s0 transversally
  }
  rep.crossings_sign = sign_change_crossings(fine, nl.s0);

  rep.positivity_ok = rep.min_u > 0.0;
  rep.endpoint_ok = rep.endpoint_residual <= 1e-7;
  rep.residual_ok = rep.max_equation_residual <= 1e-6 * rep.residual_scale;
  rep.crossings_ok = rep.crossings_angle == profile.crossings &&
                     rep.crossings_sign == profile.crossings;
  rep.passed =
      rep.positivity_ok && rep.endpoint_ok && rep.residual_ok && rep.crossings_ok;
  return rep;
}

}  // namespace minkshoot
