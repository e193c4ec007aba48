#pragma once

#include <stdexcept>
#include <string>

namespace pivotality {

/// Precondition or validation failure on caller-supplied input.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure did not reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// An integrand returned a non-finite value.
class IntegrandFault : public std::runtime_error {
 public:
  IntegrandFault(const std::string& what, double location)
      : std::runtime_error(what + " at x=" + std::to_string(location)), location_(location) {}
  double location() const noexcept { return location_; }

 private:
  double location_;
};

}  // namespace pivotality
