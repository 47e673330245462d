#pragma once

#include <stdexcept>
#include <string>

namespace doco {

/// A caller broke a documented precondition (dimension mismatch, infeasible
/// start point, inconsistent constants).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix that must be positive definite failed to factor.
class SingularMetric : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Something that cannot happen for valid inputs did. Treat as a bug.
class InternalInvariant : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Experiment configuration could not be parsed or validated.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

}  // namespace detail
}  // namespace doco
