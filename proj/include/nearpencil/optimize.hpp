#pragma once

#include "nearpencil/optimize/bfgs.hpp"
#include "nearpencil/optimize/box.hpp"
#include "nearpencil/optimize/direct.hpp"
#include "nearpencil/pencil.hpp"

namespace nearpencil {

/// |g(mu + dmu) - g(mu)| <= |dmu|_2 * |B|_2, so sigma_1(B) is a Lipschitz
/// constant of the outer function over C^r.
inline double lipschitz_bound(const MatrixPencil& pencil) { return norm2(pencil.b()); }

}  // namespace nearpencil
