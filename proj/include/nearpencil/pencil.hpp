#pragma once

// Pencil model plus the two structured matrices the distance
// characterization is built on:
//
//   C(mu, Gamma): r x r upper triangular, diagonal mu, entry (l, j) = -gamma_jl
//   L(mu, Gamma): nr x mr block lower triangular, L = (I (x) A) - (C^T (x) B)
//
// so that L vec(X) = vec(A X - B X C). Both read the same gamma storage.

#include <string>
#include <utility>

#include "nearpencil/errors.hpp"
#include "nearpencil/numlin.hpp"

namespace nearpencil {

/// A - lambda B with A, B in C^{n x m}, n >= m.
class MatrixPencil {
 public:
  MatrixPencil(ComplexMatrix a, ComplexMatrix b) : a_(std::move(a)), b_(std::move(b)) {
    detail::require(a_.rows() == b_.rows() && a_.cols() == b_.cols(),
                    "MatrixPencil: A is " + detail::dims(a_) + " but B is " +
                        detail::dims(b_));
    detail::require(a_.rows() >= 1 && a_.cols() >= 1,
                    "MatrixPencil: empty matrices");
    detail::require(a_.rows() >= a_.cols(),
                    "MatrixPencil: need n >= m, got " + detail::dims(a_));
    detail::require(a_.allFinite() && b_.allFinite(),
                    "MatrixPencil: non-finite entry");
  }

  [[nodiscard]] const ComplexMatrix& a() const { return a_; }
  [[nodiscard]] const ComplexMatrix& b() const { return b_; }
  [[nodiscard]] int rows() const { return static_cast<int>(a_.rows()); }
  [[nodiscard]] int cols() const { return static_cast<int>(a_.cols()); }
  [[nodiscard]] bool is_square() const { return a_.rows() == a_.cols(); }

  /// Same B, A replaced by A + delta.
  [[nodiscard]] MatrixPencil perturbed(const ComplexMatrix& delta) const {
    return MatrixPencil(a_ + delta, b_);
  }

 private:
  ComplexMatrix a_;
  ComplexMatrix b_;
};

/// Target eigenvalues mu_1..mu_r.
struct MuVector {
  ComplexVector values;

  MuVector() = default;
  explicit MuVector(ComplexVector v) : values(std::move(v)) {}
  MuVector(std::initializer_list<Complex> v) : values(v.size()) {
    Eigen::Index i = 0;
    for (const auto& x : v) values(i++) = x;
  }
  [[nodiscard]] int size() const { return static_cast<int>(values.size()); }
  Complex operator()(int j) const { return values(j); }
};

/// Number of Gamma parameters for r targets.
constexpr int gamma_count(int r) { return r * (r - 1) / 2; }

/// Strict-lower-triangular coupling parameters gamma_{jl}, j > l, stored
/// column by column of the strict lower triangle:
/// (g21, g31, ..., gr1, g32, ..., gr2, ..., g_{r,r-1}) in 1-based terms.
class GammaVector {
 public:
  GammaVector() = default;
  explicit GammaVector(int r) : r_(r), values_(ComplexVector::Zero(gamma_count(r))) {
    detail::require(r >= 1, "GammaVector: r must be >= 1");
  }
  GammaVector(int r, ComplexVector values) : r_(r), values_(std::move(values)) {
    detail::require(r >= 1, "GammaVector: r must be >= 1");
    detail::require(values_.size() == gamma_count(r),
                    "GammaVector: expected " + std::to_string(gamma_count(r)) +
                        " entries for r = " + std::to_string(r) + ", got " +
                        std::to_string(values_.size()));
  }

  /// Position of gamma_{jl} (0-based, j > l) in the flat array.
  static int index(int r, int j, int l) {
    return l * (r - 1) - l * (l - 1) / 2 + (j - l - 1);
  }

  [[nodiscard]] int r() const { return r_; }
  [[nodiscard]] int size() const { return static_cast<int>(values_.size()); }
  [[nodiscard]] const ComplexVector& values() const { return values_; }
  Complex operator()(int j, int l) const { return values_(index(r_, j, l)); }
  Complex& operator()(int j, int l) { return values_(index(r_, j, l)); }

  /// Interleaved (Re, Im) coordinates, the real parameterization the inner
  /// optimizer works in.
  [[nodiscard]] RealVector to_real() const {
    RealVector x(2 * values_.size());
    for (Eigen::Index k = 0; k < values_.size(); ++k) {
      x(2 * k) = values_(k).real();
      x(2 * k + 1) = values_(k).imag();
    }
    return x;
  }
  static GammaVector from_real(int r, const RealVector& x) {
    detail::require(x.size() == 2 * gamma_count(r),
                    "GammaVector::from_real: wrong coordinate count");
    ComplexVector v(gamma_count(r));
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = Complex(x(2 * k), x(2 * k + 1));
    return GammaVector(r, std::move(v));
  }

 private:
  int r_ = 1;
  ComplexVector values_;
};

struct ValidationReport {
  int rank_b = 0;
  int r = 0;
  bool well_posed = false;
};

/// Well-posedness requires rank(B) >= r.
inline ValidationReport validate(const MatrixPencil& pencil, int r,
                                 double tol = kDefaultRankTol) {
  detail::require(r >= 1, "validate: r must be >= 1");
  ValidationReport rep;
  rep.r = r;
  rep.rank_b = numerical_rank(pencil.b(), tol);
  rep.well_posed = rep.rank_b >= r;
  return rep;
}

namespace detail {

inline void check_lengths(const MuVector& mu, const GammaVector& gamma) {
  require(mu.size() >= 1, "mu must have at least one entry");
  require(gamma.r() == mu.size() && gamma.size() == gamma_count(mu.size()),
          "gamma has " + std::to_string(gamma.size()) + " entries, expected " +
              std::to_string(gamma_count(mu.size())) + " for r = " +
              std::to_string(mu.size()));
}

}  // namespace detail

inline ComplexMatrix build_C(const MuVector& mu, const GammaVector& gamma) {
  detail::check_lengths(mu, gamma);
  const int r = mu.size();
  ComplexMatrix c = ComplexMatrix::Zero(r, r);
  for (int j = 0; j < r; ++j) {
    c(j, j) = mu(j);
    for (int l = 0; l < j; ++l) c(l, j) = -gamma(j, l);
  }
  return c;
}

inline ComplexMatrix build_L(const MatrixPencil& pencil, const MuVector& mu,
                             const GammaVector& gamma) {
  detail::check_lengths(mu, gamma);
  const int r = mu.size();
  const int n = pencil.rows();
  const int m = pencil.cols();
  ComplexMatrix out = ComplexMatrix::Zero(n * r, m * r);
  for (int j = 0; j < r; ++j) {
    out.block(j * n, j * m, n, m) = pencil.a() - mu(j) * pencil.b();
    for (int l = 0; l < j; ++l) {
      out.block(j * n, l * m, n, m) = gamma(j, l) * pencil.b();
    }
  }
  return out;
}

/// Column-major reshape of a length p*q vector into a p x q matrix.
inline ComplexMatrix reshape(const ComplexVector& v, int p, int q) {
  detail::require(p >= 0 && q >= 0 && v.size() == static_cast<Eigen::Index>(p) * q,
                  "reshape: length " + std::to_string(v.size()) +
                      " does not match " + std::to_string(p) + "x" +
                      std::to_string(q));
  return Eigen::Map<const ComplexMatrix>(v.data(), p, q);
}

/// Stacks the columns of m.
inline ComplexVector vec(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

}  // namespace nearpencil
