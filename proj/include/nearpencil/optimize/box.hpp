#pragma once

#include <string>
#include <utility>

#include "nearpencil/errors.hpp"
#include "nearpencil/numlin.hpp"

namespace nearpencil {

/// Axis-aligned box [lower, upper] in R^d.
struct Box {
  RealVector lower;
  RealVector upper;

  Box() = default;
  Box(RealVector lo, RealVector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    validate();
  }

  [[nodiscard]] int dim() const { return static_cast<int>(lower.size()); }
  [[nodiscard]] RealVector width() const { return upper - lower; }
  [[nodiscard]] RealVector center() const { return 0.5 * (lower + upper); }
  [[nodiscard]] bool contains(const RealVector& x, double tol = 0.0) const {
    return ((x - lower).array() >= -tol).all() && ((upper - x).array() >= -tol).all();
  }

  void validate() const {
    detail::require(lower.size() == upper.size(),
                    "Box: lower has " + std::to_string(lower.size()) +
                        " entries, upper has " + std::to_string(upper.size()));
    detail::require(lower.allFinite() && upper.allFinite(), "Box: non-finite bound");
    detail::require((lower.array() <= upper.array()).all(),
                    "Box: lower bound exceeds upper bound");
  }
};

}  // namespace nearpencil
