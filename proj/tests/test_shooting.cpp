#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "minkshoot/eigen.hpp"
#include "minkshoot/errors.hpp"
#include "minkshoot/geometry.hpp"
#include "minkshoot/nonlinearity.hpp"
#include "minkshoot/polar.hpp"
#include "minkshoot/shooting.hpp"

using Catch::Matchers::WithinAbs;
using minkshoot::pi;
using minkshoot::Side;

namespace {
const minkshoot::Geometry seg = minkshoot::ball(1, 1.0);
const minkshoot::Nonlinearity q15 = minkshoot::make_prototype(15.0, 3.0);
const minkshoot::Nonlinearity q45 = minkshoot::make_prototype(45.0, 3.0);
}  // namespace

TEST_CASE("target angles by side and crossing count") {
  REQUIRE(minkshoot::target_angle(Side::below, 1) == 2 * pi);
  REQUIRE(minkshoot::target_angle(Side::above, 1) == pi);
  REQUIRE(minkshoot::target_angle(Side::below, 3) == 4 * pi);
  REQUIRE(minkshoot::target_angle(Side::above, 3) == 3 * pi);
  REQUIRE(std::string(minkshoot::side_name(Side::below)) == "below");
  REQUIRE(std::string(minkshoot::side_name(Side::above)) == "above");
}

TEST_CASE("height ceiling from the slope barrier") {
  REQUIRE(minkshoot::d_star(seg, q15) == 2.0);
  REQUIRE(minkshoot::d_star(minkshoot::annulus(1, 1.0, 2.0), q15) == 2.0);
  auto shifted = minkshoot::make_callback(
      [](double s) { return std::sin(pi * (s - 3.0) / 3.0); }, 3.0);
  REQUIRE(minkshoot::d_star(seg, shifted) == 4.0);
}

TEST_CASE("single shots at characteristic heights") {
  auto zero = minkshoot::shoot(seg, q15, 0.0, 1e-8);
  REQUIRE(zero.theta_start == pi);
  REQUIRE(zero.theta_end == pi);
  REQUIRE(zero.half_turns == 0);
  REQUIRE(zero.ok);

  auto top = minkshoot::shoot(seg, q15, 2.0, 1e-8);
  REQUIRE(top.theta_start == 0.0);
  REQUIRE(top.theta_end < pi);
  REQUIRE(top.half_turns == 0);

  auto near = minkshoot::shoot(seg, q15, 1.0 - 1e-3, 1e-8);
  REQUIRE(near.theta_end - near.theta_start > pi);
  REQUIRE(near.half_turns >= 1);

  for (double d : {0.2, 0.6, 1.1, 1.6, 1.95}) {
    auto s = minkshoot::shoot(seg, q15, d, 1e-8);
    REQUIRE(s.theta_end >= s.theta_start);
    REQUIRE(s.traj != nullptr);
  }
}

TEST_CASE("shot validation") {
  constexpr double qnan = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(minkshoot::shoot(seg, q15, -0.5, 1e-8),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(minkshoot::shoot(seg, q15, 1.0, 1e-8),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(minkshoot::shoot(seg, q15, qnan, 1e-8),
                    std::invalid_argument);
}

TEST_CASE("failed integrations are recorded by the tolerant shot") {
  minkshoot::IvpOptions iv;
  iv.flux_guard = 1e-6;
  auto bad = minkshoot::try_shoot(seg, q15, 1.5, 1e-8, iv);
  REQUIRE_FALSE(bad.ok);
  REQUIRE(std::isfinite(bad.fail_radius));
  REQUIRE(bad.fail_radius > seg.R1);
  REQUIRE_FALSE(bad.error.empty());
  REQUIRE(bad.half_turns == -1);

  auto good = minkshoot::try_shoot(seg, q15, 1.5, 1e-8);
  REQUIRE(good.ok);
}

TEST_CASE("scan grids are sorted and confined to one side") {
  minkshoot::SolveOptions opts;
  auto below = minkshoot::scan_grid(seg, q15, Side::below, 64, opts);
  REQUIRE(below.size() >= 32);
  for (std::size_t i = 0; i < below.size(); ++i) {
    if (i) REQUIRE(below[i] > below[i - 1]);
    REQUIRE(below[i] >= 1e-8);
    REQUIRE(below[i] <= 1.0 - 1e-6);
  }
  REQUIRE(below.front() == 1e-8);
  REQUIRE_THAT(below.back(), WithinAbs(1.0 - 1e-6, 1e-12));

  auto above = minkshoot::scan_grid(seg, q15, Side::above, 64, opts);
  for (std::size_t i = 0; i < above.size(); ++i) {
    if (i) REQUIRE(above[i] > above[i - 1]);
    REQUIRE(above[i] >= 1.0 + 1e-6 - 1e-15);
    REQUIRE(above[i] <= 2.0);
  }
  REQUIRE_THAT(above.back(), WithinAbs(2.0, 1e-12));

  REQUIRE_THROWS_AS(minkshoot::scan_grid(seg, q15, Side::below, 1, opts),
                    std::invalid_argument);
  minkshoot::SolveOptions bad;
  bad.beyond_dstar = 0.0;
  REQUIRE_THROWS_AS(minkshoot::scan_grid(seg, q15, Side::below, 16, bad),
                    std::invalid_argument);
}

TEST_CASE("scans bracket the first targets on both sides") {
  auto below = minkshoot::scan(seg, q15, Side::below, 128, 1e-8);
  bool bracket_below = false;
  for (std::size_t i = 1; i < below.size(); ++i) {
    REQUIRE(below[i].ok);
    REQUIRE(below[i].traj == nullptr);  // dropped by default
    double g0 = below[i - 1].theta_end - 2 * pi;
    double g1 = below[i].theta_end - 2 * pi;
    if (g0 * g1 < 0.0) bracket_below = true;
  }
  REQUIRE(bracket_below);

  auto above = minkshoot::scan(seg, q15, Side::above, 128, 1e-8);
  bool bracket_above = false;
  for (std::size_t i = 1; i < above.size(); ++i) {
    double g0 = above[i - 1].theta_end - pi;
    double g1 = above[i].theta_end - pi;
    if (g0 * g1 < 0.0) bracket_above = true;
  }
  REQUIRE(bracket_above);

  minkshoot::SolveOptions keep;
  keep.keep_scan_trajectories = true;
  auto kept = minkshoot::scan(seg, q15, Side::below, 32, 1e-8, keep);
  for (const auto& s : kept) REQUIRE(s.traj != nullptr);
}

TEST_CASE("bisection lands on the target angle") {
  double d1 = minkshoot::refine_root(seg, q15, 0.5, 1.0 - 1e-6, 2 * pi, 1e-10);
  REQUIRE(d1 > 0.5);
  REQUIRE(d1 < 1.0);
  auto at_root = minkshoot::shoot(seg, q15, d1, 1e-10);
  REQUIRE_THAT(at_root.theta_end, WithinAbs(2 * pi, 1e-7));
  REQUIRE(std::fabs(at_root.traj->v.back()) <= 1e-8);

  double d2 = minkshoot::refine_root(seg, q15, 1.0 + 1e-6, 2.0, pi, 1e-10);
  REQUIRE(d2 > 1.0);
  REQUIRE(d2 < 2.0);

  REQUIRE_THROWS_AS(minkshoot::refine_root(seg, q15, 0.1, 0.2, 2 * pi, 1e-10),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(minkshoot::refine_root(seg, q15, 0.5, 0.5, 2 * pi, 1e-10),
                    std::invalid_argument);
}

TEST_CASE("profiles carry consistent diagnostics") {
  double d1 = minkshoot::refine_root(seg, q15, 0.5, 1.0 - 1e-6, 2 * pi, 1e-10);
  auto p = minkshoot::make_profile(seg, q15, d1, Side::below, 1e-10);
  REQUIRE(p.crossings == 1);
  REQUIRE(p.endpoint_residual <= 1e-8);
  REQUIRE(p.min_u > 0.0);
  REQUIRE(p.max_u > 1.0);
  REQUIRE(p.max_slope < 1.0);
  REQUIRE(p.traj != nullptr);
  REQUIRE(p.polar != nullptr);

  // The endpoint flux equals the polar distance to the nearest angle level.
  double te = p.polar->theta_end();
  double dist = std::fabs(te - std::round(te / pi) * pi);
  double rho_end = p.polar->rho.back();
  if (dist > 1e-13) {
    double ratio = p.endpoint_residual / (rho_end * dist);
    REQUIRE(ratio > 0.9);
    REQUIRE(ratio < 1.1);
  }
}

TEST_CASE("complete solve finds one pair for the first level") {
  auto res = minkshoot::solve_all(seg, q15, 1, 1e-8);
  REQUIRE(res.k == 1);
  REQUIRE(res.profiles.size() == 2);
  REQUIRE(res.spectrum.size() == 2);
  REQUIRE(res.spectrum[0] == 0.0);
  REQUIRE(res.failures.empty());
  REQUIRE(res.scan_below.size() >= 128);
  REQUIRE(res.scan_above.size() >= 128);

  const auto& lo = res.profiles[0];
  const auto& hi = res.profiles[1];
  REQUIRE(lo.side == Side::below);
  REQUIRE(hi.side == Side::above);
  REQUIRE(lo.crossings == 1);
  REQUIRE(hi.crossings == 1);
  REQUIRE_THAT(lo.d, WithinAbs(0.897114404193, 1e-6));
  REQUIRE_THAT(hi.d, WithinAbs(1.06772733084, 1e-6));
  for (const auto& p : res.profiles) {
    REQUIRE(p.endpoint_residual <= 1e-8);
    REQUIRE(p.min_u > 0.0);
    REQUIRE(p.max_slope < 1.0);
  }
}

TEST_CASE("complete solve finds two pairs when the gap allows") {
  auto res = minkshoot::solve_all(seg, q45, 2, 1e-8);
  REQUIRE(res.profiles.size() == 4);
  REQUIRE(res.profiles[0].side == Side::below);
  REQUIRE(res.profiles[0].crossings == 1);
  REQUIRE(res.profiles[1].side == Side::below);
  REQUIRE(res.profiles[1].crossings == 2);
  REQUIRE(res.profiles[2].side == Side::above);
  REQUIRE(res.profiles[2].crossings == 1);
  REQUIRE(res.profiles[3].side == Side::above);
  REQUIRE(res.profiles[3].crossings == 2);
  REQUIRE_THAT(res.profiles[0].d, WithinAbs(0.776875073608, 1e-6));
  REQUIRE_THAT(res.profiles[1].d, WithinAbs(0.9797945104, 1e-6));
  REQUIRE_THAT(res.profiles[2].d, WithinAbs(1.05367374206, 1e-6));
  REQUIRE_THAT(res.profiles[3].d, WithinAbs(1.01551077458, 1e-6));
}

TEST_CASE("solve rejects levels beyond the spectral gap") {
  REQUIRE_THROWS_AS(minkshoot::solve_all(seg, q15, 2, 1e-8),
                    minkshoot::hypothesis_error);
  auto q10 = minkshoot::make_prototype(10.0, 3.0);
  REQUIRE_THROWS_AS(minkshoot::solve_all(seg, q10, 1, 1e-8),
                    minkshoot::hypothesis_error);
  REQUIRE_THROWS_AS(minkshoot::solve_all(seg, q15, 0, 1e-8),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(minkshoot::solve_all(seg, q15, 1, 1e-3),
                    std::invalid_argument);
}

TEST_CASE("solve reuses a precomputed spectrum") {
  auto spec = minkshoot::radial_spectrum(seg, 2);
  minkshoot::SolveOptions opts;
  opts.spectrum = &spec;
  auto res = minkshoot::solve_all(seg, q15, 1, 1e-8, opts);
  REQUIRE(res.spectrum == spec);
  REQUIRE(res.profiles.size() == 2);
}

TEST_CASE("restricting the scan range surfaces an incomplete solve") {
  minkshoot::SolveOptions opts;
  opts.beyond_dstar = 1e-3;  // above-side roots live outside this window
  bool threw = false;
  try {
    minkshoot::solve_all(seg, q15, 1, 1e-8, opts);
  } catch (const minkshoot::incomplete_solve_error& e) {
    threw = true;
    REQUIRE(std::string(e.what()).find("1 of 2") != std::string::npos);
    const auto& partial = e.result();
    REQUIRE(partial.profiles.size() == 1);
    REQUIRE(partial.profiles[0].side == Side::below);
    REQUIRE(partial.failures.size() == 1);
    REQUIRE(partial.failures[0].side == Side::above);
    REQUIRE(partial.failures[0].crossings == 1);
    REQUIRE_FALSE(partial.failures[0].reason.empty());
    REQUIRE_FALSE(partial.scan_above.empty());
  }
  REQUIRE(threw);
}

TEST_CASE("worker count does not change the result") {
  minkshoot::SolveOptions two;
  two.jobs = 2;
  auto serial = minkshoot::solve_all(seg, q45, 2, 1e-8);
  auto parallel = minkshoot::solve_all(seg, q45, 2, 1e-8, two);
  REQUIRE(serial.profiles.size() == parallel.profiles.size());
  for (std::size_t i = 0; i < serial.profiles.size(); ++i) {
    REQUIRE(serial.profiles[i].d == parallel.profiles[i].d);
    REQUIRE(serial.profiles[i].crossings == parallel.profiles[i].crossings);
  }
}

TEST_CASE("verification accepts genuine profiles") {
  auto res = minkshoot::solve_all(seg, q15, 1, 1e-8);
  for (const auto& p : res.profiles) {
    auto rep = minkshoot::verify_solution(seg, q15, p);
    REQUIRE(rep.passed);
    REQUIRE(rep.positivity_ok);
    REQUIRE(rep.endpoint_ok);
    REQUIRE(rep.residual_ok);
    REQUIRE(rep.crossings_ok);
    REQUIRE(std::fabs(rep.endpoint_slope) <= 1e-7);
    REQUIRE(rep.sup_distance <= 1e-6);
    REQUIRE(rep.crossings_angle == p.crossings);
    REQUIRE(rep.crossings_sign == p.crossings);
  }
}

TEST_CASE("verification of the constant equilibrium profile is exact") {
  auto traj = std::make_shared<minkshoot::Trajectory>(
      minkshoot::integrate_ivp(seg, q15, 1.0, 1e-8));
  minkshoot::SolutionProfile p;
  p.d = 1.0;
  p.crossings = 0;
  p.traj = traj;
  auto rep = minkshoot::verify_solution(seg, q15, p);
  REQUIRE(rep.endpoint_residual == 0.0);
  REQUIRE(rep.max_equation_residual == 0.0);
  REQUIRE(rep.sup_distance == 0.0);
  REQUIRE(rep.min_u == 1.0);
  REQUIRE(rep.crossings_angle == 0);
  REQUIRE(rep.crossings_sign == 0);
  REQUIRE(rep.passed);
}

TEST_CASE("verification flags corrupted profiles") {
  // The zero profile is nonnegative but not positive.
  auto traj = std::make_shared<minkshoot::Trajectory>(
      minkshoot::integrate_ivp(seg, q15, 0.0, 1e-8));
  minkshoot::SolutionProfile zero;
  zero.d = 0.0;
  zero.crossings = 0;
  zero.traj = traj;
  auto rep = minkshoot::verify_solution(seg, q15, zero);
  REQUIRE_FALSE(rep.positivity_ok);
  REQUIRE_FALSE(rep.passed);

  // A wrong stored crossing count fails the agreement check.
  auto res = minkshoot::solve_all(seg, q15, 1, 1e-8);
  auto bad = res.profiles[0];
  bad.crossings = 2;
  auto rep2 = minkshoot::verify_solution(seg, q15, bad);
  REQUIRE_FALSE(rep2.crossings_ok);
  REQUIRE_FALSE(rep2.passed);
}

TEST_CASE("direct sign changes agree with the angle on accepted profiles") {
  auto res = minkshoot::solve_all(seg, q45, 2, 1e-8);
  for (const auto& p : res.profiles) {
    REQUIRE(minkshoot::sign_change_crossings(*p.traj, 1.0) == p.crossings);
  }
}
