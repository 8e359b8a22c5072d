#pragma once

// Inner objective f(Gamma) = sigma_{mr-r+1}(L(mu, Gamma, A, B)), counted
// from the largest singular value, together with its Gamma-gradient and the
// multiplicity / linear-independence qualifications at a point.

#include <algorithm>
#include <limits>

#include "nearpencil/numlin.hpp"
#include "nearpencil/pencil.hpp"

namespace nearpencil {

struct QualificationTolerances {
  double gap_tol = 1e-8;  // relative to sigma_1(L)
  double li_tol = 1e-8;   // relative to sigma_1 of the m x r reshape of V
};

struct ObjectiveEval {
  double value = 0.0;
  ComplexVector left;   // U, length nr
  ComplexVector right;  // V, length mr
  double gap = 0.0;
  bool mult_ok = false;
  bool li_ok = false;
  double li_smallest_sv = 0.0;
  RealVector singular_values;  // all mr singular values of L, non-increasing
  int index = 0;               // 0-based position of value in singular_values
  int n = 0;
  int m = 0;
  int r = 0;
};

struct QualificationReport {
  bool mult_ok = false;
  bool li_ok = false;
  double gap = 0.0;
  double li_smallest_sv = 0.0;
  double li_relative = 0.0;
};

/// Re-derives both qualification flags from the singular data in `eval`.
inline QualificationReport check_qualifications(const ObjectiveEval& eval, int r,
                                                int m,
                                                const QualificationTolerances& tol = {}) {
  QualificationReport q;
  const auto& s = eval.singular_values;
  const int k = eval.index;
  const double s1 = s.size() > 0 ? s(0) : 0.0;
  double gap = std::numeric_limits<double>::infinity();
  if (k > 0) gap = std::min(gap, s(k - 1) - s(k));
  if (k + 1 < s.size()) gap = std::min(gap, s(k) - s(k + 1));
  if (!std::isfinite(gap)) {
    q.gap = 1.0;  // no other singular value to collide with
  } else {
    q.gap = s1 > 0.0 ? gap / s1 : 0.0;
  }
  q.mult_ok = q.gap > tol.gap_tol;

  if (m >= r && eval.right.size() == static_cast<Eigen::Index>(m) * r) {
    const RealVector sv = singular_values(reshape(eval.right, m, r));
    q.li_smallest_sv = sv(sv.size() - 1);
    q.li_relative = sv(0) > 0.0 ? q.li_smallest_sv / sv(0) : 0.0;
    q.li_ok = q.li_relative > tol.li_tol;
  }
  return q;
}

inline ObjectiveEval eval_sigma(const MatrixPencil& pencil, const MuVector& mu,
                                const GammaVector& gamma,
                                const QualificationTolerances& tol = {}) {
  const ComplexMatrix l = build_L(pencil, mu, gamma);
  const SvdResult d = svd(l);
  ObjectiveEval e;
  e.n = pencil.rows();
  e.m = pencil.cols();
  e.r = mu.size();
  e.index = e.m * e.r - e.r;
  e.singular_values = d.singular_values;
  e.value = d.singular_values(e.index);
  e.left = d.left_vectors.col(e.index);
  e.right = d.right_vectors.col(e.index);
  const QualificationReport q = check_qualifications(e, e.r, e.m, tol);
  e.gap = q.gap;
  e.mult_ok = q.mult_ok;
  e.li_ok = q.li_ok;
  e.li_smallest_sv = q.li_smallest_sv;
  return e;
}

/// U_j^* B V_l for the block components of the singular pair in `eval`.
inline Complex coupling(const MatrixPencil& pencil, const ObjectiveEval& eval,
                        int j, int l) {
  const int n = eval.n;
  const int m = eval.m;
  return eval.left.segment(j * n, n).dot(pencil.b() * eval.right.segment(l * m, m));
}

/// Gradient of f in the interleaved (Re gamma, Im gamma) coordinates:
///   df/dRe g_jl = Re(U_j^* B V_l),  df/dIm g_jl = -Im(U_j^* B V_l).
/// At clustered or zero singular values this is the gradient of whichever
/// pair the SVD returned.
inline RealVector gamma_gradient(const MatrixPencil& pencil, const ObjectiveEval& eval) {
  const int r = eval.r;
  RealVector g(2 * gamma_count(r));
  for (int l = 0; l < r; ++l) {
    for (int j = l + 1; j < r; ++j) {
      const Complex c = coupling(pencil, eval, j, l);
      const int k = GammaVector::index(r, j, l);
      g(2 * k) = c.real();
      g(2 * k + 1) = -c.imag();
    }
  }
  return g;
}

inline RealVector gamma_gradient(const MatrixPencil& pencil, const MuVector& mu,
                                 const GammaVector& gamma) {
  return gamma_gradient(pencil, eval_sigma(pencil, mu, gamma));
}

/// max_{j>l} |U_j^* B V_l|, zero at a smooth interior maximizer.
inline double max_coupling(const MatrixPencil& pencil, const ObjectiveEval& eval) {
  double worst = 0.0;
  for (int l = 0; l < eval.r; ++l) {
    for (int j = l + 1; j < eval.r; ++j) {
      worst = std::max(worst, std::abs(coupling(pencil, eval, j, l)));
    }
  }
  return worst;
}

/// || U^* U - V^* V ||_2 for the n x r and m x r reshapes of the pair.
inline double gram_mismatch(const ObjectiveEval& eval) {
  const ComplexMatrix uu = reshape(eval.left, eval.n, eval.r);
  const ComplexMatrix vv = reshape(eval.right, eval.m, eval.r);
  return norm2(uu.adjoint() * uu - vv.adjoint() * vv);
}

}  // namespace nearpencil
