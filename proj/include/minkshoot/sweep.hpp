#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eigen.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "nonlinearity.hpp"
#include "polar.hpp"
#include "shooting.hpp"

namespace minkshoot {

// One accepted root on one branch at one q.
struct BranchPoint {
  double q = 0.0;
  double d = 0.0;
  Side side = Side::below;
  int crossings = 0;
  double u_at_R1 = 0.0;  // equals d for radial shots
  double endpoint_residual = 0.0;
};

// A (q, side, crossings) slot where the hypothesis held but no root was
// accepted. Gaps are data, not failures of the whole sweep.
struct SweepGap {
  double q = 0.0;
  Side side = Side::below;
  int crossings = 0;
  std::string reason;
};

// Grid bracket of the q where a branch first appears: the branch is absent
// at q_lo and present at q_hi. present = false marks a branch never seen.
struct OnsetInterval {
  Side side = Side::below;
  int crossings = 0;
  double q_lo = 0.0;
  double q_hi = 0.0;
  bool present = false;
};

struct SweepResult {
  std::vector<double> q_grid;
  std::vector<double> spectrum;  // lambda_1 .. lambda_{k_max + 1}
  std::vector<BranchPoint> points;
  std::vector<SweepGap> gaps;
  std::vector<OnsetInterval> onsets;
};

// First grid q carrying a point for (side, j), bracketed by its predecessor.
inline OnsetInterval detect_branch_onset(const SweepResult& res, Side side, int j) {
  OnsetInterval on;
  on.side = side;
  on.crossings = j;
  for (std::size_t i = 0; i < res.q_grid.size(); ++i) {
    double q = res.q_grid[i];
    bool found = false;
    for (const auto& p : res.points)
      if (p.side == side && p.crossings == j && p.q == q) {
        found = true;
        break;
      }
    if (found) {
      on.present = true;
      on.q_hi = q;
      on.q_lo = i == 0 ? q : res.q_grid[i - 1];
      return on;
    }
  }
  return on;
}

// Sweeps the superlinear exponent q over a uniform grid, tracking every
// branch (side, j) admissible under q - r > lambda_{j+1}. Each q gets a
// fresh scan; roots from the previous q seed extra probe brackets so thin
// branches survive grid coarseness.
inline SweepResult sweep_q(const Geometry& geom, double r_exp, double q_lo,
                           double q_hi, int q_steps, int k_max, double tol,
                           const SolveOptions& opts = {}) {
  if (!(r_exp >= 2.0)) throw std::invalid_argument("sweep_q: r must be >= 2");
  if (!(q_lo > r_exp)) throw std::invalid_argument("sweep_q: q_lo must exceed r");
  if (!(q_hi > q_lo)) throw std::invalid_argument("sweep_q: q_hi must exceed q_lo");
  if (q_steps < 2) throw std::invalid_argument("sweep_q: q_steps must be >= 2");
  if (k_max < 1) throw std::invalid_argument("sweep_q: k_max must be >= 1");
  if (!(tol >= 1e-13 && tol <= 1e-4))
    throw std::invalid_argument("sweep_q: tol must lie in [1e-13, 1e-4]");

  SweepResult res;
  res.spectrum = radial_spectrum(geom, k_max + 1);
  res.q_grid.reserve(q_steps + 1);
  for (int i = 0; i <= q_steps; ++i)
    res.q_grid.push_back(q_lo + (q_hi - q_lo) * i / static_cast<double>(q_steps));

  double tol_refine = std::fmin(tol, 1e-10);
  const double accept_tol = 1e-8;
  std::map<std::pair<int, int>, double> prev_root;  // (side, j) -> last d

  for (double q : res.q_grid) {
    int k_q = 0;
    for (int k = 1; k <= k_max; ++k)
      if (q - r_exp > res.spectrum[k]) k_q = k;
    if (k_q == 0) continue;  // no admissible branch at this q

    Nonlinearity nl = make_prototype(q, r_exp);
    double s0 = nl.s0;
    double gap = 1e-6 * s0;
    std::vector<ShotResult> scans[2] = {
        scan(geom, nl, Side::below, opts.scan_points, tol, opts),
        scan(geom, nl, Side::above, opts.scan_points, tol, opts)};

    for (Side side : {Side::below, Side::above}) {
      double dom_lo, dom_hi;
      if (side == Side::below) {
        dom_lo = std::fmin(1e-8, 0.5 * s0);
        dom_hi = s0 - gap;
      } else {
        dom_lo = s0 + gap;
        dom_hi = s0 + geom.width() * opts.beyond_dstar;
      }
      const auto& sc = scans[side == Side::below ? 0 : 1];
      for (int j = 1; j <= k_q; ++j) {
        double target = target_angle(side, j);
        auto brackets = detail::extract_brackets(sc, target);

        auto key = std::make_pair(side == Side::below ? 0 : 1, j);
        auto prev = prev_root.find(key);
        if (prev != prev_root.end()) {
          // Probe around last q's root with widening windows until the
          // target is straddled; clipped to the side's domain.
          for (int m = 0; m <= 8; ++m) {
            double w = 1e-4 * s0 * std::pow(3.0, m);
            double a = std::fmax(dom_lo, prev->second - w);
            double b = std::fmin(dom_hi, prev->second + w);
            if (!(a < b)) continue;
            ShotResult sa = try_shoot(geom, nl, a, tol);
            ShotResult sb = try_shoot(geom, nl, b, tol);
            if (!sa.ok || !sb.ok) continue;
            if ((sa.theta_end - target) * (sb.theta_end - target) <= 0.0) {
              brackets.emplace_back(a, b);
              break;
            }
          }
        }

        std::vector<BranchPoint> roots;
        std::string reject_reasons;
        for (const auto& [a, b] : brackets) {
          double droot;
          SolutionProfile p;
          try {
            droot = refine_root(geom, nl, a, b, target, tol_refine);
            p = make_profile(geom, nl, droot, side, tol_refine);
          } catch (const std::exception& e) {
            reject_reasons +=
                std::string(reject_reasons.empty() ? "" : "; ") + e.what();
            continue;
          }
          double dev = std::fmax(s0 - p.min_u, p.max_u - s0);
          if (p.crossings == j && p.endpoint_residual <= accept_tol &&
              p.min_u > 0.0 && dev > 10.0 * tol) {
            BranchPoint bp;
            bp.q = q;
            bp.d = droot;
            bp.side = side;
            bp.crossings = j;
            bp.u_at_R1 = droot;
            bp.endpoint_residual = p.endpoint_residual;
            roots.push_back(bp);
          } else {
            reject_reasons += std::string(reject_reasons.empty() ? "" : "; ") +
                              "rejected root at d = " + detail::fmt_g(droot);
          }
        }

        std::sort(roots.begin(), roots.end(),
                  [](const BranchPoint& x, const BranchPoint& y) { return x.d < y.d; });
        std::vector<BranchPoint> kept;
        for (auto& bp : roots) {
          if (!kept.empty() && bp.d - kept.back().d < 10.0 * tol) {
            if (bp.endpoint_residual < kept.back().endpoint_residual)
              kept.back() = bp;
          } else {
            kept.push_back(bp);
          }
        }

        if (kept.empty()) {
          SweepGap g;
          g.q = q;
          g.side = side;
          g.crossings = j;
          g.reason = brackets.empty() ? "no sign change against the target angle"
                                      : reject_reasons;
          res.gaps.push_back(std::move(g));
          prev_root.erase(key);
        } else {
          // Seed the next q with the root nearest the previous one so the
          // probe follows a single branch.
          double seed = kept.front().d;
          if (prev != prev_root.end()) {
            for (const auto& bp : kept)
              if (std::abs(bp.d - prev->second) < std::abs(seed - prev->second))
                seed = bp.d;
          }
          prev_root[key] = seed;
          for (auto& bp : kept) res.points.push_back(bp);
        }
      }
    }
  }

  std::sort(res.points.begin(), res.points.end(),
            [](const BranchPoint& x, const BranchPoint& y) {
              if (x.q != y.q) return x.q < y.q;
              if (x.side != y.side) return x.side == Side::below;
              if (x.crossings != y.crossings) return x.crossings < y.crossings;
              return x.d < y.d;
            });

  for (Side side : {Side::below, Side::above})
    for (int j = 1; j <= k_max; ++j)
      res.onsets.push_back(detect_branch_onset(res, side, j));
  return res;
}

}  // namespace minkshoot
