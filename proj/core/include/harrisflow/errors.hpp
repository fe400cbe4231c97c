#pragma once

#include <stdexcept>
#include <string>

namespace hflow {

// A hypothesis of the underlying theorems does not hold for the requested
// configuration (e.g. d(Gamma) >= 1/100, initial gaps <= epsilon).
// The CLI maps this to exit code 3.
class HypothesisError : public std::invalid_argument {
 public:
  explicit HypothesisError(const std::string& what) : std::invalid_argument(what) {}
};

// Covariance matrix could not be factored even after maximal diagonal jitter.
class FactorizationError : public std::runtime_error {
 public:
  explicit FactorizationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hflow
