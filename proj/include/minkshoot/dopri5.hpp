#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "errors.hpp"

namespace minkshoot {

template <std::size_t D>
using StateVec = std::array<double, D>;

// Quartic interpolant of one accepted step, valid on [r0, r0 + h]:
//   y(r0 + sigma h) = c1 + c2 s + c3 s(1-s) + c4 s^2(1-s) + c5 s^2(1-s)^2.
template <std::size_t D>
struct DenseStep {
  double r0 = 0.0;
  double h = 0.0;
  StateVec<D> c1{}, c2{}, c3{}, c4{}, c5{};

  StateVec<D> eval(double r) const noexcept {
    double s = (r - r0) / h;
    double m = 1.0 - s;
    StateVec<D> y{};
    for (std::size_t i = 0; i < D; ++i)
      y[i] = c1[i] + s * (c2[i] + m * (c3[i] + s * (c4[i] + m * c5[i])));
    return y;
  }

  // dy/dr from the interpolant; exact derivative of eval.
  StateVec<D> eval_derivative(double r) const noexcept {
    double s = (r - r0) / h;
    StateVec<D> dy{};
    for (std::size_t i = 0; i < D; ++i) {
      double p = c2[i] + c3[i] * (1.0 - 2.0 * s) + c4[i] * s * (2.0 - 3.0 * s) +
                 c5[i] * s * (2.0 - 6.0 * s + 4.0 * s * s);
      dy[i] = p / h;
    }
    return dy;
  }
};

template <std::size_t D>
struct IntegrationResult {
  std::vector<double> r;               // accepted step endpoints, r.front() = start
  std::vector<StateVec<D>> y;          // states at those radii
  std::vector<DenseStep<D>> dense;     // dense[i] covers [r[i], r[i+1]]
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

template <std::size_t D>
struct IntegrationControl {
  double rtol = 1e-8;
  double atol = 1e-14;
  double h_init = 0.0;  // 0: 1e-3 of the interval
  double h_max = 0.0;   // 0: the interval length
  // Controller shrink limit. A rejection that would push h below this floor
  // while h is also below |r|/4 aborts the integration; the |r|/4 escape
  // keeps legitimate tiny steps near a tiny starting radius alive.
  double underflow_floor = 0.0;
  std::size_t max_steps = 4000000;
  // Veto on a trial step (r0, y0) -> (r1, y1). Returning false rejects the
  // step even when the error estimate passed.
  std::function<bool(double, const StateVec<D>&, double, const StateVec<D>&)> step_veto;
};

// Dormand-Prince 5(4) pair with FSAL and the classical quartic dense output.
template <std::size_t D, class RHS>
IntegrationResult<D> integrate_dopri5(RHS&& rhs, double r_begin, double r_end,
                                      const StateVec<D>& y_begin,
                                      const IntegrationControl<D>& ctl) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0,
                          d7 = 69997945.0 / 29380423.0;

  if (!(r_end > r_begin))
    throw std::invalid_argument("integrate_dopri5: need r_begin < r_end");

  IntegrationResult<D> out;
  double span = r_end - r_begin;
  double h_max = ctl.h_max > 0.0 ? ctl.h_max : span;
  double h = ctl.h_init > 0.0 ? ctl.h_init : 1e-3 * span;
  h = std::fmin(h, h_max);

  double r = r_begin;
  StateVec<D> y = y_begin;
  StateVec<D> k1 = rhs(r, y);

  out.r.push_back(r);
  out.y.push_back(y);

  bool last_rejected = false;
  for (std::size_t step = 0;; ++step) {
    if (step >= ctl.max_steps)
      throw integration_error("integrate_dopri5: step budget exhausted", r);
    bool clipped = false;
    if (r + h >= r_end) {
      h = r_end - r;
      clipped = true;
    }
    if (r + h == r)
      throw integration_error("integrate_dopri5: step size underflow", r);

    StateVec<D> yt, k2, k3, k4, k5, k6, k7, ynew;
    for (std::size_t i = 0; i < D; ++i) yt[i] = y[i] + h * a21 * k1[i];
    k2 = rhs(r + c2 * h, yt);
    for (std::size_t i = 0; i < D; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = rhs(r + c3 * h, yt);
    for (std::size_t i = 0; i < D; ++i)
      yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(r + c4 * h, yt);
    for (std::size_t i = 0; i < D; ++i)
      yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(r + c5 * h, yt);
    for (std::size_t i = 0; i < D; ++i)
      yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                          a65 * k5[i]);
    k6 = rhs(r + h, yt);
    for (std::size_t i = 0; i < D; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                            b6 * k6[i]);
    double r_new = clipped ? r_end : r + h;
    k7 = rhs(r_new, ynew);

    double errsq = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < D; ++i) {
      if (!std::isfinite(ynew[i])) finite = false;
      double err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                        e6 * k6[i] + e7 * k7[i]);
      double sc = ctl.atol + ctl.rtol * std::fmax(std::fabs(y[i]), std::fabs(ynew[i]));
      errsq += (err / sc) * (err / sc);
    }
    double errnorm = std::sqrt(errsq / static_cast<double>(D));

    bool accept = finite && errnorm <= 1.0;
    if (accept && ctl.step_veto && !ctl.step_veto(r, y, r_new, ynew)) accept = false;

    if (accept) {
      DenseStep<D> ds;
      ds.r0 = r;
      ds.h = r_new - r;
      for (std::size_t i = 0; i < D; ++i) {
        double ydiff = ynew[i] - y[i];
        double bspl = h * k1[i] - ydiff;
        ds.c1[i] = y[i];
        ds.c2[i] = ydiff;
        ds.c3[i] = bspl;
        ds.c4[i] = ydiff - h * k7[i] - bspl;
        ds.c5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                        d6 * k6[i] + d7 * k7[i]);
      }
      out.dense.push_back(ds);

      r = r_new;
      y = ynew;
      k1 = k7;  // FSAL
      out.r.push_back(r);
      out.y.push_back(y);
      ++out.accepted;
      if (r >= r_end) break;

      double fac = finite && errnorm > 0.0 ? 0.9 * std::pow(errnorm, -0.2) : 6.0;
      fac = std::fmin(last_rejected ? 1.0 : 6.0, std::fmax(0.2, fac));
      h = std::fmin(h * fac, h_max);
      last_rejected = false;
    } else {
      ++out.rejected;
      double fac = finite && errnorm > 0.0 && errnorm < 1e100
                       ? std::fmax(0.1, 0.9 * std::pow(errnorm, -0.2))
                       : 0.5;
      fac = std::fmin(fac, 0.5);
      double h_new = h * fac;
      if (ctl.underflow_floor > 0.0 && h_new < ctl.underflow_floor &&
          h_new < 0.25 * std::fabs(r))
        throw integration_error("integrate_dopri5: step size underflow", r);
      h = h_new;
      last_rejected = true;
    }
  }
  return out;
}

}  // namespace minkshoot
