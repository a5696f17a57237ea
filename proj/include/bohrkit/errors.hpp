#pragma once

#include <stdexcept>
#include <string>

namespace bohrkit {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two operands refer to different symbol bases.
class BasisMismatch : public Error {
 public:
  BasisMismatch() : Error("frequencies refer to different symbol bases") {}
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Invalid input: parameters, configuration, preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A configured ceiling (support cap, node budget, stage count) was hit.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// An exact invariant failed. Always a bug signal.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace bohrkit
