#pragma once

#include <stdexcept>
#include <string>

namespace mcprod {

// Precondition violated by the caller (bad shape, out-of-range argument,
// non-finite input).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that cannot produce a meaningful value (degenerate
// variances, singular covariance, non-finite summand).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mcprod
