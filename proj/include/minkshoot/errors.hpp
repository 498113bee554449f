#pragma once

#include <stdexcept>
#include <string>

namespace minkshoot {

// The step controller could not advance past radius(); carried so callers
// can tell where a trajectory died.
class integration_error : public std::runtime_error {
public:
  integration_error(const std::string& what, double radius)
      : std::runtime_error(what), radius_(radius) {}

  double radius() const noexcept { return radius_; }

private:
  double radius_;
};

// Polar conversion met rho == 0: the initial datum sits on the equilibrium
// or the integrator produced a defective path.
class degenerate_path_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A structural guarantee of the computation failed (monotone angle, slope
// bound, sampling density). Indicates a bug, not bad user input.
class contract_violation_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// Eigenvalue bracketing exhausted its search range without a sign change.
class search_failure_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A mathematical hypothesis the requested computation relies on does not
// hold for the given data (e.g. f'(s0) below the required eigenvalue).
class hypothesis_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace minkshoot
