#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "minkshoot/curvature.hpp"
#include "minkshoot/dopri5.hpp"
#include "minkshoot/errors.hpp"
#include "minkshoot/geometry.hpp"
#include "minkshoot/io.hpp"
#include "minkshoot/ivp.hpp"
#include "minkshoot/nonlinearity.hpp"
#include "minkshoot/polar.hpp"
#include "minkshoot/shooting.hpp"

using Catch::Matchers::WithinAbs;
using minkshoot::pi;

namespace {

// Bare trajectory with hand-placed samples; enough for to_polar, which only
// reads r, u, v and the initial datum.
minkshoot::Trajectory synthetic(std::vector<double> r, std::vector<double> u,
                                std::vector<double> v, double d) {
  minkshoot::Trajectory t(minkshoot::ball(1, std::fmax(1.0, r.back())), d, 1e-8);
  t.r = std::move(r);
  t.u = std::move(u);
  t.v = std::move(v);
  return t;
}

minkshoot::PolarPath synthetic_path(std::vector<double> theta) {
  minkshoot::PolarPath p;
  p.theta = std::move(theta);
  p.r.resize(p.theta.size());
  for (std::size_t i = 0; i < p.r.size(); ++i)
    p.r[i] = p.theta.size() > 1 ? double(i) / double(p.theta.size() - 1) : 0.0;
  p.rho.assign(p.theta.size(), 1.0);
  return p;
}

}  // namespace

TEST_CASE("polar angle of elementary states") {
  // Zero datum: the phase vector sits frozen at (-s0, 0).
  auto nl = minkshoot::make_prototype(15.0, 3.0);
  auto traj = minkshoot::integrate_ivp(minkshoot::ball(1, 1.0), nl, 0.0, 1e-8);
  auto path = minkshoot::to_polar(traj, 1.0);
  for (std::size_t i = 0; i < path.theta.size(); ++i) {
    REQUIRE(path.theta[i] == pi);
    REQUIRE(path.rho[i] == 1.0);
  }
  REQUIRE(path.winding() == 0.0);
  REQUIRE(path.half_turns() == 0);
  REQUIRE(minkshoot::crossing_report(path).count == 0);

  // Single state (u - s0, v) = (0, -alpha) maps to theta = pi/2.
  auto one = synthetic({0.0}, {1.0}, {-1.0}, 0.5);
  auto p1 = minkshoot::to_polar(one, 1.0, 1.0);
  REQUIRE_THAT(p1.theta_start(), WithinAbs(pi / 2, 1e-15));
  REQUIRE(p1.rho[0] == 1.0);
}

TEST_CASE("below-side start angle is pi on the upper branch") {
  auto nl = minkshoot::make_prototype(15.0, 3.0);
  auto traj = minkshoot::integrate_ivp(minkshoot::ball(1, 1.0), nl, 0.5, 1e-8);
  auto path = minkshoot::to_polar(traj, 1.0);
  REQUIRE(path.theta_start() == pi);
  for (std::size_t i = 1; i < path.theta.size(); ++i) {
    REQUIRE(path.theta[i] >= path.theta[i - 1]);
    REQUIRE(path.rho[i] > 0.0);
  }
  REQUIRE(path.theta_end() > path.theta_start());
}

TEST_CASE("above-side start angle is zero") {
  auto nl = minkshoot::make_prototype(15.0, 3.0);
  auto traj = minkshoot::integrate_ivp(minkshoot::ball(1, 1.0), nl, 1.2, 1e-8);
  auto path = minkshoot::to_polar(traj, 1.0);
  REQUIRE(path.theta_start() == 0.0);
  REQUIRE(path.theta_end() > 0.0);
}

TEST_CASE("polar conversion rejects degenerate input") {
  auto nl = minkshoot::make_prototype(15.0, 3.0);
  auto traj = minkshoot::integrate_ivp(minkshoot::ball(1, 1.0), nl, 0.5, 1e-8);
  REQUIRE_THROWS_AS(minkshoot::to_polar(traj, 1.0, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(minkshoot::to_polar(traj, 1.0, -2.0), std::invalid_argument);

  auto on_eq = minkshoot::integrate_ivp(minkshoot::ball(1, 1.0), nl, 1.0, 1e-8);
  REQUIRE_THROWS_AS(minkshoot::to_polar(on_eq, 1.0),
                    minkshoot::degenerate_path_error);

  // rho hitting zero mid-path.
  auto pinched = synthetic({0.0, 1.0}, {0.5, 1.0}, {0.0, 0.0}, 0.5);
  REQUIRE_THROWS_AS(minkshoot::to_polar(pinched, 1.0),
                    minkshoot::degenerate_path_error);
}

TEST_CASE("polar conversion enforces the step rotation contract") {
  // Half-turn in a single step is ambiguous.
  auto flip = synthetic({0.0, 1.0}, {2.0, 0.0}, {0.0, 0.0}, 2.0);
  REQUIRE_THROWS_AS(minkshoot::to_polar(flip, 1.0),
                    minkshoot::contract_violation_error);

  // Backward rotation violates monotonicity.
  auto back = synthetic({0.0, 1.0}, {2.0, 1.0 + std::cos(-0.1)},
                        {0.0, 0.0998334166468}, 2.0);
  REQUIRE_THROWS_AS(minkshoot::to_polar(back, 1.0),
                    minkshoot::contract_violation_error);
}

TEST_CASE("crossings are the half-integer levels passed by the angle") {
  auto a = minkshoot::crossing_report(synthetic_path({pi, 2 * pi}));
  REQUIRE(a.count == 1);
  REQUIRE(a.radii.size() == 1);
  REQUIRE_THAT(a.radii[0], WithinAbs(0.5, 1e-12));
  REQUIRE_FALSE(a.tie_warning);

  auto b = minkshoot::crossing_report(synthetic_path({0.0, 2 * pi}));
  REQUIRE(b.count == 2);

  auto c = minkshoot::crossing_report(synthetic_path({pi, 1.4 * pi}));
  REQUIRE(c.count == 0);

  // Endpoint within 1e-12 of a half-integer level raises the tie flag.
  auto d = minkshoot::crossing_report(synthetic_path({pi, 2.5 * pi + 1e-13}));
  REQUIRE(d.count == 2);
  REQUIRE(d.tie_warning);
}

TEST_CASE("crossing radii are interior and increasing") {
  auto nl = minkshoot::make_prototype(45.0, 3.0);
  auto geom = minkshoot::ball(1, 1.0);
  auto traj = minkshoot::integrate_ivp(geom, nl, 0.98, 1e-10);
  auto rep = minkshoot::crossing_report(minkshoot::to_polar(traj, 1.0));
  REQUIRE(rep.count >= 1);
  double prev = geom.R1;
  for (double rr : rep.radii) {
    REQUIRE(rr > prev);
    REQUIRE(rr < geom.R2);
    prev = rr;
  }
}

TEST_CASE("half turns and crossings do not depend on the scaling") {
  auto nl = minkshoot::make_prototype(15.0, 3.0);
  auto geom = minkshoot::ball(1, 1.0);
  for (double d : {0.3, 0.7, 0.95, 1.1, 1.5, 1.9}) {
    auto traj = minkshoot::integrate_ivp(geom, nl, d, 1e-8);
    auto ref = minkshoot::to_polar(traj, 1.0, 1.0);
    for (double alpha : {0.5, 2.0, 8.0}) {
      auto other = minkshoot::to_polar(traj, 1.0, alpha);
      REQUIRE(other.half_turns() == ref.half_turns());
      REQUIRE(minkshoot::crossing_report(other).count ==
              minkshoot::crossing_report(ref).count);
    }
  }
}

TEST_CASE("winding against the near-equilibrium lower bound") {
  auto geom = minkshoot::ball(1, 1.0);
  auto q15 = minkshoot::make_prototype(15.0, 3.0);
  REQUIRE(minkshoot::winding(
              minkshoot::integrate_ivp(geom, q15, 1.0 - 1e-3, 1e-10), 1.0) > pi);
  REQUIRE(minkshoot::winding(
              minkshoot::integrate_ivp(geom, q15, 1.0 + 1e-3, 1e-10), 1.0) > pi);
  auto q45 = minkshoot::make_prototype(45.0, 3.0);
  REQUIRE(minkshoot::winding(
              minkshoot::integrate_ivp(geom, q45, 1.0 - 1e-3, 1e-10), 1.0) >
          2 * pi);
}

TEST_CASE("crossing count agrees with direct sign changes") {
  auto nl = minkshoot::make_prototype(45.0, 3.0);
  auto geom = minkshoot::ball(2, 1.0);
  for (double d : {0.7, 0.9, 0.98, 1.05, 1.3}) {
    auto traj = minkshoot::integrate_ivp(geom, nl, d, 1e-10);
    int by_angle = minkshoot::crossing_count(traj, 1.0);
    int by_sign = minkshoot::sign_change_crossings(traj, 1.0);
    REQUIRE(by_angle == by_sign);
  }
}

TEST_CASE("unwrapped angle matches the scalar angle equation") {
  // Independent cross-check: integrate the angle ODE
  //   theta' = (x w f(u) + z phi_inv(z / w)) / rho^2,
  // with x = u - s0 and z = -v read off the trajectory interpolant, and
  // compare with the unwrapped per-sample angle.
  auto nl = minkshoot::make_prototype(15.0, 3.0);
  for (auto geom : {minkshoot::ball(1, 1.0), minkshoot::ball(2, 1.0)}) {
    for (double d : {0.5, 0.9, 1.2, 1.7}) {
      auto traj = minkshoot::integrate_ivp(geom, nl, d, 1e-10);
      auto path = minkshoot::to_polar(traj, 1.0);

      auto rhs = [&](double r, const std::array<double, 1>&) {
        double u = traj.eval_u(r);
        double v = traj.eval_v(r);
        double w = geom.rpow(r);
        double x = u - 1.0;
        double z = -v;
        double rho2 = x * x + z * z;
        return std::array<double, 1>{
            (x * w * minkshoot::f_hat(nl, u) + z * minkshoot::phi_inv(z / w)) /
            rho2};
      };
      minkshoot::IntegrationControl<1> ctl;
      ctl.rtol = 1e-10;
      ctl.atol = 1e-13;
      double r_from = traj.r[1];
      auto res = minkshoot::integrate_dopri5<1>(rhs, r_from, geom.R2,
                                                {path.theta[1]}, ctl);
      REQUIRE_THAT(res.y.back()[0], WithinAbs(path.theta_end(), 1e-6));
    }
  }
}

TEST_CASE("polar serialization has the documented shape") {
  auto nl = minkshoot::make_prototype(15.0, 3.0);
  auto traj = minkshoot::integrate_ivp(minkshoot::ball(1, 1.0), nl, 0.5, 1e-8);
  auto path = minkshoot::to_polar(traj, 1.0);
  std::string csv = minkshoot::csv_polar(path);
  REQUIRE(csv.rfind("r,theta,rho\n", 0) == 0);
  std::size_t rows = 0;
  for (char ch : csv)
    if (ch == '\n') ++rows;
  REQUIRE(rows == path.r.size() + 1);
}
