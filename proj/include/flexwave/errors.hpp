#pragma once

#include <stdexcept>
#include <string>

namespace flexwave {

// Argument outside the domain where an operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A solvability condition of the problem does not hold. `value` carries the
// quantity that failed the test (e.g. the limit of the depth integral).
class ConditionFailed : public std::runtime_error {
 public:
  ConditionFailed(const std::string& what, double value)
      : std::runtime_error(what), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

// Iterative method failed: step-size underflow, no bracket, no convergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flexwave
