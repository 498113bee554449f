#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include "errors.hpp"

namespace minkshoot {

// Reaction term f on [0, inf) with derivative and positive equilibrium s0:
// f(0) = f(s0) = 0, f < 0 on (0, s0), f > 0 beyond s0.
struct Nonlinearity {
  std::function<double(double)> eval_f;
  std::function<double(double)> eval_f_prime;
  double s0 = 1.0;
};

// f extended by zero to negative arguments. The shooting system uses this
// extension so trajectories that dip below zero stay well posed.
inline double f_hat(const Nonlinearity& nl, double s) {
  return s >= 0.0 ? nl.eval_f(s) : 0.0;
}

inline double f_prime_at_s0(const Nonlinearity& nl) { return nl.eval_f_prime(nl.s0); }

// Power family f(s) = s^{q-1} - s^{r-1}, 2 <= r < q, equilibrium s0 = 1.
inline Nonlinearity make_prototype(double q_exp, double r_exp) {
  if (!std::isfinite(q_exp) || !std::isfinite(r_exp) || !(r_exp >= 2.0) || !(r_exp < q_exp))
    throw std::invalid_argument("make_prototype: exponents must satisfy 2 <= r < q");
  Nonlinearity nl;
  nl.s0 = 1.0;
  nl.eval_f = [q_exp, r_exp](double s) {
    return std::pow(s, q_exp - 1.0) - std::pow(s, r_exp - 1.0);
  };
  nl.eval_f_prime = [q_exp, r_exp](double s) {
    return (q_exp - 1.0) * std::pow(s, q_exp - 2.0) -
           (r_exp - 1.0) * std::pow(s, r_exp - 2.0);
  };
  return nl;
}

namespace detail {

// Five-point central difference at the conventional step 1e-6*max(1,|s|).
// The narrow step is pinned by the interface contract; the wide stencil
// keeps the truncation error negligible at that step, so the result is
// limited only by roundoff in f (about 1e-10 of the local scale, and far
// better near zeros of f such as s0). Falls back to a one-sided stencil
// when the domain boundary at 0 is too close.
inline double fd_derivative(const std::function<double(double)>& f, double s) {
  double h = 1e-6 * std::fmax(1.0, std::fabs(s));
  // Snap h to the grid spacing at s; an unsnapped step is off by up to one
  // ulp of s, which alone costs ~1e-10 relative accuracy.
  volatile double sph = s + h;
  h = sph - s;
  if (s - 2.0 * h >= 0.0) {
    return (-f(s + 2.0 * h) + 8.0 * f(s + h) - 8.0 * f(s - h) + f(s - 2.0 * h)) /
           (12.0 * h);
  }
  return (-25.0 * f(s) + 48.0 * f(s + h) - 36.0 * f(s + 2.0 * h) +
          16.0 * f(s + 3.0 * h) - 3.0 * f(s + 4.0 * h)) /
         (12.0 * h);
}

}  // namespace detail

// Wraps a user-supplied f. The derivative defaults to a finite-difference
// approximation; pass an analytic one when available. Checks the structural
// requirements f(0) = f(s0) = 0 and f'(s0) > 0 up to roundoff.
inline Nonlinearity make_callback(std::function<double(double)> f, double s0,
                                  std::function<double(double)> fprime = nullptr) {
  if (!f) throw std::invalid_argument("make_callback: f must be callable");
  if (!std::isfinite(s0) || !(s0 > 0.0))
    throw std::invalid_argument("make_callback: s0 must be positive");
  Nonlinearity nl;
  nl.s0 = s0;
  nl.eval_f = std::move(f);
  if (fprime) {
    nl.eval_f_prime = std::move(fprime);
  } else {
    auto base = nl.eval_f;
    nl.eval_f_prime = [base](double s) { return detail::fd_derivative(base, s); };
  }
  double dscale = std::fmax(1.0, std::fabs(nl.eval_f_prime(s0)));
  if (std::fabs(nl.eval_f(0.0)) > 1e-8 * dscale)
    throw std::invalid_argument("make_callback: f(0) must vanish");
  if (std::fabs(nl.eval_f(s0)) > 1e-8 * dscale)
    throw std::invalid_argument("make_callback: f(s0) must vanish");
  if (!(nl.eval_f_prime(s0) > 0.0))
    throw hypothesis_error("make_callback: f'(s0) must be positive");
  return nl;
}

}  // namespace minkshoot
