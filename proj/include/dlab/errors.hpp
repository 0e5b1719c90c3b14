#pragma once

#include <stdexcept>
#include <string>

namespace dlab {

// Precondition or representation-tag violation by the caller.
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The grid cannot resolve the field's spectrum.
struct AliasingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or a quadrature that failed its own sanity check.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A direct-sum routine was asked to do more work than its cap allows.
struct TractabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Grid sizing for a sweep exceeded the configured memory cap.
struct MemoryCapError : std::runtime_error {
  MemoryCapError(const std::string& what, double lambda)
      : std::runtime_error(what), failing_lambda(lambda) {}
  double failing_lambda;
};

}  // namespace dlab
