#pragma once

// Dense complex linear algebra used throughout the library. SVD and
// pseudoinverse run on Eigen; the generalized eigenvalue problem goes to
// LAPACK's complex QZ (zggev), which Eigen does not provide.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "nearpencil/errors.hpp"

namespace nearpencil {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Default relative tolerance for rank decisions (relative to sigma_1).
inline constexpr double kDefaultRankTol = 1e-10;

struct SvdResult {
  RealVector singular_values;  // non-increasing
  ComplexMatrix left_vectors;  // rows x k, k = min(rows, cols)
  ComplexMatrix right_vectors;  // cols x k
};

namespace detail {

inline std::string dims(const ComplexMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

}  // namespace detail

/// Thin SVD, M = U diag(s) V^*. Each right singular vector is scaled so its
/// largest-magnitude entry is real and positive; the matching left vector
/// gets the same unit factor so that M v_k = s_k u_k still holds.
inline SvdResult svd(const ComplexMatrix& m) {
  if (!detail::all_finite(m)) {
    throw ContractViolation("svd: non-finite entries in " + detail::dims(m) +
                           " matrix");
  }
  SvdResult out;
  if (m.size() == 0) {
    out.singular_values.resize(0);
    out.left_vectors.resize(m.rows(), 0);
    out.right_vectors.resize(m.cols(), 0);
    return out;
  }
  Eigen::JacobiSVD<ComplexMatrix> solver(m,
                                         Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw ComputationError("svd: decomposition did not converge for " +
                           detail::dims(m) + " matrix");
  }
  out.singular_values = solver.singularValues();
  out.left_vectors = solver.matrixU();
  out.right_vectors = solver.matrixV();
  for (Eigen::Index k = 0; k < out.right_vectors.cols(); ++k) {
    Eigen::Index pivot = 0;
    out.right_vectors.col(k).cwiseAbs().maxCoeff(&pivot);
    const Complex entry = out.right_vectors(pivot, k);
    const double mag = std::abs(entry);
    if (mag == 0.0) continue;
    const Complex phase = std::conj(entry) / mag;
    out.right_vectors.col(k) *= phase;
    out.left_vectors.col(k) *= phase;
  }
  return out;
}

inline RealVector singular_values(const ComplexMatrix& m) {
  if (!detail::all_finite(m)) {
    throw ContractViolation("singular_values: non-finite entries in " +
                           detail::dims(m) + " matrix");
  }
  if (m.size() == 0) return RealVector(0);
  Eigen::JacobiSVD<ComplexMatrix> solver(m);
  return solver.singularValues();
}

/// Operator 2-norm.
inline double norm2(const ComplexMatrix& m) {
  const RealVector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(0);
}

/// Smallest of the min(rows, cols) singular values.
inline double sigma_min(const ComplexMatrix& m) {
  const RealVector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

/// Moore-Penrose pseudoinverse; singular values below tol * sigma_1 are
/// treated as zero.
inline ComplexMatrix pseudoinverse(const ComplexMatrix& m,
                                   double tol = kDefaultRankTol) {
  detail::require(tol >= 0.0, "pseudoinverse: tol must be non-negative");
  ComplexMatrix pinv = ComplexMatrix::Zero(m.cols(), m.rows());
  if (m.size() == 0) return pinv;
  const SvdResult d = svd(m);
  const double cutoff = tol * d.singular_values(0);
  for (Eigen::Index k = 0; k < d.singular_values.size(); ++k) {
    const double s = d.singular_values(k);
    if (s <= cutoff || s == 0.0) break;
    pinv.noalias() +=
        (d.right_vectors.col(k) / s) * d.left_vectors.col(k).adjoint();
  }
  return pinv;
}

/// Number of singular values >= tol * sigma_1. The zero matrix has rank 0.
inline int numerical_rank(const ComplexMatrix& m, double tol = kDefaultRankTol) {
  const RealVector s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cutoff = tol * s(0);
  return static_cast<int>((s.array() >= cutoff).count());
}

/// Homogeneous generalized eigenvalue (alpha, beta); lambda = alpha / beta.
struct EigenPair {
  Complex alpha;
  Complex beta;

  [[nodiscard]] bool is_infinite(double tol = kDefaultRankTol) const {
    return std::abs(beta) <= tol * std::max(std::abs(alpha), std::abs(beta));
  }
  [[nodiscard]] Complex value() const { return alpha / beta; }
};

/// Eigenvalues of the square pencil A - lambda B (complex QZ).
inline std::vector<EigenPair> generalized_eigenvalues(const ComplexMatrix& a,
                                                      const ComplexMatrix& b) {
  detail::require(a.rows() == a.cols() && b.rows() == b.cols(),
                  "generalized_eigenvalues: A and B must be square, got " +
                      detail::dims(a) + " and " + detail::dims(b));
  detail::require(a.rows() == b.rows(),
                  "generalized_eigenvalues: size mismatch " + detail::dims(a) +
                      " vs " + detail::dims(b));
  if (!detail::all_finite(a) || !detail::all_finite(b)) {
    throw ContractViolation("generalized_eigenvalues: non-finite input");
  }
  const auto n = static_cast<lapack_int>(a.rows());
  std::vector<EigenPair> out;
  if (n == 0) return out;
  ComplexMatrix aa = a;
  ComplexMatrix bb = b;
  std::vector<Complex> alpha(n), beta(n);
  Complex dummy;
  const lapack_int info =
      LAPACKE_zggev(LAPACK_COL_MAJOR, 'N', 'N', n, aa.data(), n, bb.data(), n,
                    alpha.data(), beta.data(), &dummy, 1, &dummy, 1);
  if (info != 0) {
    throw ComputationError("generalized_eigenvalues: zggev failed (info=" +
                           std::to_string(info) + ") for " + detail::dims(a) +
                           " pencil");
  }
  out.reserve(n);
  for (lapack_int k = 0; k < n; ++k) out.push_back({alpha[k], beta[k]});
  return out;
}

/// Finite eigenvalues only, in the order returned by the QZ iteration.
inline std::vector<Complex> finite_eigenvalues(
    const std::vector<EigenPair>& pairs, double tol = kDefaultRankTol) {
  std::vector<Complex> out;
  for (const auto& p : pairs) {
    if (!p.is_infinite(tol)) out.push_back(p.value());
  }
  return out;
}

}  // namespace nearpencil
