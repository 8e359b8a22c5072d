#pragma once

#include <stdexcept>
#include <string>

namespace nearpencil {

/// A caller broke a documented precondition (shape mismatch, bad length).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dense decomposition failed to produce a result.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The distance problem has no meaning for this input, e.g. rank(B) < r.
class IllPosedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace detail
}  // namespace nearpencil
