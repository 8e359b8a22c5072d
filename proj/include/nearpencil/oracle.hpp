#pragma once

// Brute-force checks of the theory at small scale: solution-space
// dimensions of Sylvester equations, finite-difference gradients, and the
// decay of sigma_{nr-r+1} along a ray Gamma = t Gamma_0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nearpencil/errors.hpp"
#include "nearpencil/numlin.hpp"
#include "nearpencil/objective.hpp"
#include "nearpencil/pencil.hpp"

namespace nearpencil {

struct JordanBlock {
  Complex eigenvalue;
  int size = 1;
};

struct JordanSpec {
  std::vector<JordanBlock> blocks;

  void validate() const {
    for (const auto& b : blocks) detail::require(b.size >= 1, "JordanSpec: block size < 1");
  }
  [[nodiscard]] int dimension() const {
    int d = 0;
    for (const auto& b : blocks) d += b.size;
    return d;
  }
};

/// Block-diagonal Jordan form, ones on the superdiagonal of each block.
inline ComplexMatrix jordan_matrix(const JordanSpec& spec) {
  spec.validate();
  const int d = spec.dimension();
  ComplexMatrix j = ComplexMatrix::Zero(d, d);
  int off = 0;
  for (const auto& b : spec.blocks) {
    for (int k = 0; k < b.size; ++k) {
      j(off + k, off + k) = b.eigenvalue;
      if (k + 1 < b.size) j(off + k, off + k + 1) = 1.0;
    }
    off += b.size;
  }
  return j;
}

/// dim {X : FX = XG} = sum over common eigenvalues of sum min(c_i, p_q)
/// across the Jordan block sizes c_i of F and p_q of G at that eigenvalue.
inline int sylvester_dimension_formula(const JordanSpec& f, const JordanSpec& g,
                                       double tol = 1e-12) {
  f.validate();
  g.validate();
  int dim = 0;
  for (const auto& bf : f.blocks) {
    for (const auto& bg : g.blocks) {
      if (std::abs(bf.eigenvalue - bg.eigenvalue) <= tol * (1.0 + std::abs(bf.eigenvalue))) {
        dim += std::min(bf.size, bg.size);
      }
    }
  }
  return dim;
}

/// Nullity of (I_q (x) F) - (G^T (x) I_p) for F p x p and G q x q.
inline int sylvester_dimension_bruteforce(const ComplexMatrix& f, const ComplexMatrix& g,
                                          double tol = kDefaultRankTol) {
  detail::require(f.rows() == f.cols() && g.rows() == g.cols(),
                  "sylvester_dimension_bruteforce: F and G must be square");
  const Eigen::Index p = f.rows();
  const Eigen::Index q = g.rows();
  ComplexMatrix k = ComplexMatrix::Zero(p * q, p * q);
  for (Eigen::Index j = 0; j < q; ++j) {
    k.block(j * p, j * p, p, p) += f;
    for (Eigen::Index l = 0; l < q; ++l) {
      k.block(l * p, j * p, p, p) -= g(j, l) * ComplexMatrix::Identity(p, p);
    }
  }
  return static_cast<int>(p * q) - numerical_rank(k, tol);
}

/// Nullity of (I (x) A) - (C^T (x) B): the dimension of {X : AX = BXC}.
inline int generalized_sylvester_dimension(const MatrixPencil& pencil, const ComplexMatrix& c,
                                           double tol = kDefaultRankTol) {
  detail::require(c.rows() == c.cols(), "generalized_sylvester_dimension: C must be square");
  const int n = pencil.rows();
  const int m = pencil.cols();
  const Eigen::Index r = c.rows();
  ComplexMatrix k = ComplexMatrix::Zero(n * r, m * r);
  for (Eigen::Index j = 0; j < r; ++j) {
    k.block(j * n, j * m, n, m) += pencil.a();
    for (Eigen::Index l = 0; l < r; ++l) {
      k.block(l * n, j * m, n, m) -= c(j, l) * pencil.b();
    }
  }
  return static_cast<int>(m * r) - numerical_rank(k, tol);
}

/// Standard complex Gaussian Gamma.
inline GammaVector random_gamma(int r, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ComplexVector v(gamma_count(r));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = Complex(normal(rng), normal(rng));
  return GammaVector(r, std::move(v));
}

/// Dimension of {X : AX = BXC(mu, Gamma)} for generic Gamma: `draws` Gaussian
/// samples must agree, otherwise the batch is redrawn up to `attempts` times.
/// Returns -1 if no batch agrees.
inline int generic_sylvester_dimension(const MatrixPencil& pencil, const MuVector& mu,
                                       std::uint64_t seed, int draws = 5, int attempts = 10,
                                       double tol = kDefaultRankTol) {
  std::mt19937_64 rng(seed);
  for (int a = 0; a < attempts; ++a) {
    int first = -1;
    bool agree = true;
    for (int d = 0; d < draws && agree; ++d) {
      const int dim = generalized_sylvester_dimension(
          pencil, build_C(mu, random_gamma(mu.size(), rng)), tol);
      if (first < 0) first = dim;
      agree = dim == first;
    }
    if (agree) return first;
  }
  return -1;
}

/// Central differences of eval_sigma over the interleaved (Re, Im)
/// coordinates of Gamma.
inline RealVector fd_gradient(const MatrixPencil& pencil, const MuVector& mu,
                              const GammaVector& gamma, double step) {
  detail::require(step > 0.0, "fd_gradient: step must be positive");
  const int r = mu.size();
  const RealVector x = gamma.to_real();
  RealVector g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    RealVector xp = x;
    RealVector xm = x;
    xp(k) += step;
    xm(k) -= step;
    const double fp = eval_sigma(pencil, mu, GammaVector::from_real(r, xp)).value;
    const double fm = eval_sigma(pencil, mu, GammaVector::from_real(r, xm)).value;
    g(k) = (fp - fm) / (2.0 * step);
  }
  return g;
}

/// sigma_{nr-r+1}(L(mu, t Gamma_0)) for each t. For a square pencil with
/// rank(B) >= r these tend to zero as t grows. The bound behind this is
/// sigma <= 1 / sigma_r(X) where X collects the blocks X_{j+1,j} of the
/// inverse of L, and those blocks grow in proportion to t.
inline std::vector<double> gamma_decay_probe(const MatrixPencil& pencil, const MuVector& mu,
                                             const GammaVector& direction,
                                             const std::vector<double>& scales) {
  detail::require(pencil.is_square(), "gamma_decay_probe: pencil must be square");
  const int r = mu.size();
  detail::require(numerical_rank(pencil.b()) >= r,
                  "gamma_decay_probe: rank(B) must be at least r");
  detail::require(r < 2 || direction.values().cwiseAbs().maxCoeff() > 0.0,
                  "gamma_decay_probe: direction must be non-zero");
  std::vector<double> out;
  out.reserve(scales.size());
  for (double t : scales) {
    out.push_back(eval_sigma(pencil, mu, GammaVector(r, t * direction.values())).value);
  }
  return out;
}

}  // namespace nearpencil
