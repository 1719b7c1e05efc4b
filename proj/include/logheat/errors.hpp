#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace logheat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a type invariant (nonpositive weight, bad knot list, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A formula was evaluated outside the region where it is stated.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The measure kind does not support the requested operation.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// A hypothesis checked on a grid failed.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& what, double at)
      : Error(what), at_(at) {}
  double at() const noexcept { return at_; }

 private:
  double at_;
};

class BracketError : public Error {
 public:
  using Error::Error;
};

class SearchError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, underflow of all weights, ODE blow-up. `at()` carries
/// the offending time or coordinate when one is known, NaN otherwise.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what,
                          double at = std::numeric_limits<double>::quiet_NaN())
      : Error(what), at_(at) {}
  double at() const noexcept { return at_; }

 private:
  double at_;
};

}  // namespace logheat
