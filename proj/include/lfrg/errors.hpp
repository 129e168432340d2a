#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace lfrg {

// Argument outside the mathematical domain of a kernel or beta system
// (negative fluctuation mass, imaginary de Sitter index, 1 + m^2 <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A polygamma argument landed on a non-positive integer.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Adaptive quadrature or an iterative solver ran out of budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed problem description (bad tolerances, t0 == t_end, ...).
class InvalidProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Short number formatting for error messages.
inline std::string show(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace lfrg
