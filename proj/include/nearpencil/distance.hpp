#pragma once

// Distance from A - lambda B to the nearest (A + dA) - lambda B with r
// eigenvalues in a finite set, a region, or anywhere in the plane:
//
//   tau = inf_mu g(mu),   g(mu) = sup_Gamma sigma_{mr-r+1}(L(mu, Gamma, A, B)),
//
// with the inner sup solved by BFGS and the outer inf by enumeration (finite
// sets) or DIRECT (regions). The minimizing perturbation is
// dA = -g(mu*) U V^+ built from the singular pair at the inner maximizer, and
// every result is checked against the perturbed pencil before it is returned.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "nearpencil/errors.hpp"
#include "nearpencil/numlin.hpp"
#include "nearpencil/objective.hpp"
#include "nearpencil/optimize.hpp"
#include "nearpencil/pencil.hpp"

namespace nearpencil {

// ---------------------------------------------------------------------------
// Target regions

struct FiniteSet {
  std::vector<Complex> points;
};

/// Every mu_j ranges over the rectangle [lower(0), upper(0)] x [lower(1), upper(1)]
/// of (Re, Im).
struct BoxRegion {
  Box box;
};

/// Closed left half-plane, searched over Re in [search_box.lower(0), 0] and
/// Im in [search_box.lower(1), search_box.upper(1)].
struct LeftHalfPlane {
  Box search_box;
};

/// The whole plane; without a search box a default is derived from the pencil.
struct WholePlane {
  std::optional<Box> search_box;
};

using TargetRegion = std::variant<FiniteSet, BoxRegion, LeftHalfPlane, WholePlane>;

struct DistanceOptions {
  BfgsConfig inner;
  DirectConfig outer = [] {
    DirectConfig c;
    c.max_evals = 3000;
    c.box_size_tol = 1e-9;
    c.value_tol = 1e-6;
    return c;
  }();
  QualificationTolerances qualification;
  double rank_tol = kDefaultRankTol;
  double verify_tol = 1e-6;       // eigenvalue matching, absolute
  double verify_rank_tol = 1e-6;  // r smallest sigma of L at the perturbed pencil, relative
  /// Force mu_1 = ... = mu_r: nearest pencil with an r-fold eigenvalue.
  bool coincident = false;
  /// Enumerate ordered tuples of a finite set instead of multisets.
  bool full_tuples = false;
  /// Zoom rounds after the main DIRECT run: each re-runs DIRECT on a box
  /// refine_fraction times smaller around the incumbent.
  int refine_rounds = 3;
  double refine_fraction = 0.1;
  int refine_evals = 600;
  /// Best outer samples tried, in order of value, until one verifies.
  int verify_candidates = 40;
  std::uint64_t seed = 7;
};

struct DistanceQuery {
  MatrixPencil pencil;
  int r = 1;
  TargetRegion region;
  DistanceOptions options;
};

// ---------------------------------------------------------------------------
// Results

struct EigenMatch {
  Complex target;
  Complex achieved;
  double residual = 0.0;
  bool ok = false;
};

struct VerificationReport {
  std::vector<EigenMatch> matches;
  RealVector rank_singular_values;  // r smallest of L(mu*, Gamma', A + dA, B)
  double rank_sigma1 = 0.0;
  bool rank_ok = false;
  bool eigen_ok = false;
  bool region_ok = false;
  bool norm_ok = false;  // |dA|_2 does not exceed kappa
  double delta_norm = 0.0;
  bool passed = false;
  std::vector<Complex> perturbed_finite_eigenvalues;  // square pencils only
  int perturbed_infinite_count = 0;
};

struct DistanceDiagnostics {
  int outer_evals = 0;
  int inner_evaluations = 0;
  int restarts = 0;
  bool inner_converged = false;
  double lower_bound = 0.0;  // smallest g seen, verified or not
  int candidates_tried = 0;
  std::string stop_reason;
};

struct DistanceResult {
  double tau = 0.0;
  MuVector mu_star;
  GammaVector gamma_star;
  ComplexMatrix delta_A;
  double kappa = 0.0;
  bool mult_ok = false;
  bool li_ok = false;
  bool verified = false;
  ObjectiveEval eval;
  VerificationReport verification;
  DistanceDiagnostics diagnostics;
};

struct InnerResult {
  double value = 0.0;
  GammaVector gamma_star;
  ObjectiveEval eval;
  bool converged = false;
  int restarts = 0;
  int evaluations = 0;
};

// ---------------------------------------------------------------------------
// Inner problem

/// g(mu) by BFGS over (Re, Im) of Gamma. First from Gamma = 0; if that
/// stationary point fails a qualification, again from all ones with the
/// restart policy. The larger value wins.
inline InnerResult g_of_mu(const MatrixPencil& pencil, const MuVector& mu,
                           const BfgsConfig& cfg,
                           const QualificationTolerances& qual = {}) {
  const int r = mu.size();
  InnerResult out;
  if (r == 1) {
    out.gamma_star = GammaVector(1);
    out.eval = eval_sigma(pencil, mu, out.gamma_star, qual);
    out.value = out.eval.value;
    out.converged = true;
    out.evaluations = 1;
    return out;
  }

  // bfgs_maximize calls the acceptor right after evaluating the same point.
  RealVector cached_x;
  ObjectiveEval cached;
  auto evaluate = [&](const RealVector& x) -> const ObjectiveEval& {
    if (cached_x.size() != x.size() || cached_x != x) {
      cached = eval_sigma(pencil, mu, GammaVector::from_real(r, x), qual);
      cached_x = x;
    }
    return cached;
  };
  const SmoothObjective f = [&](const RealVector& x) {
    const ObjectiveEval& e = evaluate(x);
    return ValueAndGradient{e.value, gamma_gradient(pencil, e)};
  };
  const PointAcceptor qualified = [&](const RealVector& x) {
    const ObjectiveEval& e = evaluate(x);
    return e.mult_ok && e.li_ok;
  };

  const int d = 2 * gamma_count(r);
  BfgsConfig first = cfg;
  first.max_restarts = 0;
  BfgsResult best = bfgs_maximize(f, RealVector::Zero(d), first, qualified);
  int evaluations = best.evaluations;
  int restarts = 0;
  if (!best.accepted) {
    RealVector ones = RealVector::Zero(d);
    for (int k = 0; k < gamma_count(r); ++k) ones(2 * k) = 1.0;
    const BfgsResult alt = bfgs_maximize(f, ones, cfg, qualified);
    evaluations += alt.evaluations;
    restarts = alt.n_restarts;
    if (alt.value > best.value) best = alt;
  }
  out.gamma_star = GammaVector::from_real(r, best.point);
  out.eval = eval_sigma(pencil, mu, out.gamma_star, qual);
  out.value = out.eval.value;
  out.converged = best.converged;
  out.restarts = restarts;
  out.evaluations = evaluations + 1;
  return out;
}

// ---------------------------------------------------------------------------
// Perturbation and verification

/// dA = -value * U V^+ with U, V the n x r and m x r reshapes of the pair.
inline ComplexMatrix build_perturbation(const MatrixPencil& pencil, const ObjectiveEval& eval,
                                        double rank_tol = kDefaultRankTol) {
  const int n = pencil.rows();
  const int m = pencil.cols();
  if (eval.value == 0.0) return ComplexMatrix::Zero(n, m);
  const ComplexMatrix uu = reshape(eval.left, n, eval.r);
  const ComplexMatrix vv = reshape(eval.right, m, eval.r);
  return -eval.value * uu * pseudoinverse(vv, rank_tol);
}

/// Every singular pair of L whose singular value lies within the
/// multiplicity tolerance of eval.value, the pair in `eval` first.
inline std::vector<ObjectiveEval> cluster_pairs(const MatrixPencil& pencil, const MuVector& mu,
                                                const GammaVector& gamma,
                                                const ObjectiveEval& eval,
                                                const QualificationTolerances& qual = {}) {
  std::vector<ObjectiveEval> out{eval};
  const SvdResult d = svd(build_L(pencil, mu, gamma));
  const double s1 = d.singular_values(0);
  for (Eigen::Index k = 0; k < d.singular_values.size(); ++k) {
    if (k == eval.index) continue;
    if (std::abs(d.singular_values(k) - eval.value) > qual.gap_tol * s1) continue;
    ObjectiveEval e = eval;
    e.left = d.left_vectors.col(k);
    e.right = d.right_vectors.col(k);
    out.push_back(std::move(e));
  }
  return out;
}

namespace detail {

inline bool same_point(Complex a, Complex b) {
  return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a));
}

inline bool in_region(const TargetRegion& region, Complex z, double tol) {
  return std::visit(
      [&](const auto& reg) -> bool {
        using T = std::decay_t<decltype(reg)>;
        if constexpr (std::is_same_v<T, FiniteSet>) {
          return std::any_of(reg.points.begin(), reg.points.end(),
                             [&](Complex p) { return std::abs(p - z) <= tol; });
        } else if constexpr (std::is_same_v<T, BoxRegion>) {
          return z.real() >= reg.box.lower(0) - tol && z.real() <= reg.box.upper(0) + tol &&
                 z.imag() >= reg.box.lower(1) - tol && z.imag() <= reg.box.upper(1) + tol;
        } else if constexpr (std::is_same_v<T, LeftHalfPlane>) {
          return z.real() <= tol;
        } else {
          return std::isfinite(z.real()) && std::isfinite(z.imag());
        }
      },
      region);
}

inline ComplexVector random_gamma(int r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ComplexVector g(gamma_count(r));
  for (Eigen::Index k = 0; k < g.size(); ++k) g(k) = Complex(normal(rng), normal(rng));
  return g;
}

}  // namespace detail

/// Checks a perturbation against the perturbed pencil:
///  (a) L(mu, Gamma', A + dA, B) has r singular values <= verify_rank_tol * sigma_1
///      for a random Gamma', with sigma_1 the larger of the perturbed and
///      unperturbed L (the perturbed L may vanish entirely when m = 1);
///  (b) each target is an eigenvalue of the perturbed pencil. Square pencils
///      match every distinct target of multiplicity p to its p nearest
///      eigenvalues: the cluster mean must lie within verify_tol and each
///      member within verify_tol^(1/p). Rectangular pencils test
///      sigma_m(A + dA - mu_j B) instead;
///  (c) the matched eigenvalues lie in the region;
///  (d) |dA|_2 <= (1 + 1e-8) kappa, so kappa is attained and not only bounded.
inline VerificationReport verify_result(const MatrixPencil& pencil, const ComplexMatrix& delta_A,
                                        const MuVector& mu, const TargetRegion& region,
                                        double kappa, const DistanceOptions& opt = {}) {
  VerificationReport rep;
  rep.delta_norm = norm2(delta_A);
  rep.norm_ok = rep.delta_norm <= (1.0 + 1e-8) * kappa + 1e-14;
  const int r = mu.size();
  const int m = pencil.cols();
  const MatrixPencil pert = pencil.perturbed(delta_A);

  const GammaVector generic(r, detail::random_gamma(r, opt.seed ^ 0x9e3779b97f4a7c15ULL));
  const RealVector s = singular_values(build_L(pert, mu, generic));
  rep.rank_sigma1 = std::max(s(0), norm2(build_L(pencil, mu, generic)));
  rep.rank_singular_values = s.tail(r);
  rep.rank_ok =
      (rep.rank_singular_values.array() <= opt.verify_rank_tol * rep.rank_sigma1).all();

  rep.eigen_ok = true;
  rep.region_ok = true;
  const double scale = std::max(1.0, norm2(pert.a()) + norm2(pert.b()));
  if (pencil.is_square()) {
    const auto pairs = generalized_eigenvalues(pert.a(), pert.b());
    std::vector<Complex> finite = finite_eigenvalues(pairs, opt.rank_tol);
    rep.perturbed_finite_eigenvalues = finite;
    rep.perturbed_infinite_count = static_cast<int>(pairs.size() - finite.size());
    std::vector<bool> used(finite.size(), false);
    std::vector<bool> done(r, false);
    for (int j = 0; j < r; ++j) {
      if (done[j]) continue;
      std::vector<int> group;
      for (int q = j; q < r; ++q) {
        if (!done[q] && detail::same_point(mu(j), mu(q))) {
          group.push_back(q);
          done[q] = true;
        }
      }
      const int p = static_cast<int>(group.size());
      const double member_tol = std::pow(opt.verify_tol, 1.0 / p) * (1.0 + std::abs(mu(j)));
      std::vector<Complex> picked;
      for (int q = 0; q < p; ++q) {
        int arg = -1;
        double bestd = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < finite.size(); ++e) {
          if (used[e]) continue;
          const double dist = std::abs(finite[e] - mu(j));
          if (dist < bestd) {
            bestd = dist;
            arg = static_cast<int>(e);
          }
        }
        if (arg < 0) break;
        used[arg] = true;
        picked.push_back(finite[arg]);
      }
      Complex mean = 0.0;
      for (Complex z : picked) mean += z;
      const bool complete = static_cast<int>(picked.size()) == p;
      if (complete) mean /= static_cast<double>(p);
      const bool mean_ok =
          complete && std::abs(mean - mu(j)) <= opt.verify_tol * (1.0 + std::abs(mu(j)));
      for (int q = 0; q < p; ++q) {
        EigenMatch mt;
        mt.target = mu(j);
        if (q < static_cast<int>(picked.size())) {
          mt.achieved = picked[q];
          mt.residual = std::abs(picked[q] - mu(j));
          mt.ok = mean_ok && mt.residual <= member_tol;
          if (!detail::in_region(region, mt.achieved, member_tol)) rep.region_ok = false;
        } else {
          mt.achieved = Complex(std::nan(""), std::nan(""));
          mt.residual = std::numeric_limits<double>::infinity();
          mt.ok = false;
        }
        if (!mt.ok) rep.eigen_ok = false;
        rep.matches.push_back(mt);
      }
    }
  } else {
    for (int j = 0; j < r; ++j) {
      EigenMatch mt;
      mt.target = mu(j);
      mt.achieved = mu(j);
      const RealVector sv = singular_values(pert.a() - mu(j) * pert.b());
      mt.residual = sv(m - 1);
      mt.ok = mt.residual <= opt.verify_tol * scale;
      if (!mt.ok) rep.eigen_ok = false;
      if (!detail::in_region(region, mu(j), opt.verify_tol)) rep.region_ok = false;
      rep.matches.push_back(mt);
    }
  }
  rep.passed = rep.rank_ok && rep.eigen_ok && rep.region_ok && rep.norm_ok;
  return rep;
}

/// Overload taking a finished result, for callers re-checking a DistanceResult.
inline VerificationReport verify_result(const MatrixPencil& pencil, const DistanceResult& result,
                                        const TargetRegion& region,
                                        const DistanceOptions& opt = {}) {
  return verify_result(pencil, result.delta_A, result.mu_star, region, result.kappa, opt);
}

namespace detail {

inline void require_well_posed(const MatrixPencil& pencil, int r, double tol) {
  const ValidationReport v = validate(pencil, r, tol);
  if (!v.well_posed) {
    throw IllPosedError("rank(B) = " + std::to_string(v.rank_b) + " < r = " +
                        std::to_string(r) +
                        ": the distance requires rank(B) >= r, otherwise the perturbed "
                        "pencil has fewer than r finite eigenvalues for every dA");
  }
}

/// Builds the perturbation for one inner solution. When the qualifications
/// fail, every singular pair in the cluster is tried and the first that
/// verifies is kept.
inline DistanceResult finish_candidate(const MatrixPencil& pencil, const MuVector& mu,
                                       const InnerResult& inner, const TargetRegion& region,
                                       const DistanceOptions& opt) {
  DistanceResult res;
  res.tau = inner.value;
  res.kappa = inner.value;
  res.mu_star = mu;
  res.gamma_star = inner.gamma_star;
  res.mult_ok = inner.eval.mult_ok;
  res.li_ok = inner.eval.li_ok;
  res.eval = inner.eval;
  res.diagnostics.inner_converged = inner.converged;
  res.diagnostics.restarts = inner.restarts;
  res.diagnostics.inner_evaluations = inner.evaluations;

  std::vector<ObjectiveEval> pairs{inner.eval};
  if (!(inner.eval.mult_ok && inner.eval.li_ok)) {
    pairs = cluster_pairs(pencil, mu, inner.gamma_star, inner.eval, opt.qualification);
  }
  bool first = true;
  for (const auto& pair : pairs) {
    const ComplexMatrix da = build_perturbation(pencil, pair, opt.rank_tol);
    VerificationReport rep = verify_result(pencil, da, mu, region, inner.value, opt);
    if (first || rep.passed) {
      res.delta_A = da;
      res.verification = std::move(rep);
      res.verified = res.verification.passed;
      if (!first) {
        res.eval.left = pair.left;
        res.eval.right = pair.right;
      }
    }
    first = false;
    if (res.verified) break;
  }
  return res;
}

struct Scored {
  MuVector mu;
  double value;
  int order;
};

/// Walks candidates in increasing g and returns the first verified one; if
/// none verifies, the best unverified one.
inline DistanceResult pick_verified(const MatrixPencil& pencil, std::vector<Scored> cands,
                                    const TargetRegion& region, const DistanceOptions& opt,
                                    bool reuse_first_inner = false,
                                    const InnerResult* first_inner = nullptr) {
  std::stable_sort(cands.begin(), cands.end(), [](const Scored& a, const Scored& b) {
    return a.value < b.value || (a.value == b.value && a.order < b.order);
  });
  DistanceResult fallback;
  bool have_fallback = false;
  int tried = 0;
  for (const auto& c : cands) {
    if (tried >= std::max(1, opt.verify_candidates)) break;
    ++tried;
    const InnerResult inner = (reuse_first_inner && tried == 1 && first_inner)
                                  ? *first_inner
                                  : g_of_mu(pencil, c.mu, opt.inner, opt.qualification);
    DistanceResult res = finish_candidate(pencil, c.mu, inner, region, opt);
    res.diagnostics.candidates_tried = tried;
    if (res.verified) return res;
    if (!have_fallback) {
      fallback = std::move(res);
      have_fallback = true;
    }
  }
  fallback.diagnostics.candidates_tried = tried;
  return fallback;
}

inline std::vector<MuVector> enumerate_targets(const std::vector<Complex>& pts, int r,
                                               bool full_tuples, bool coincident) {
  std::vector<MuVector> out;
  const int k = static_cast<int>(pts.size());
  if (coincident) {
    for (Complex p : pts) out.emplace_back(ComplexVector::Constant(r, p));
    return out;
  }
  std::vector<int> idx(r, 0);
  while (true) {
    ComplexVector v(r);
    for (int j = 0; j < r; ++j) v(j) = pts[idx[j]];
    out.emplace_back(std::move(v));
    // Next tuple; multisets keep idx non-decreasing.
    int pos = r - 1;
    while (pos >= 0 && idx[pos] == k - 1) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int q = pos + 1; q < r; ++q) idx[q] = full_tuples ? 0 : idx[pos];
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Distances

/// tau_r(S) for a finite set S: g over all multisets of size r from S.
inline DistanceResult tau_specified_set(const MatrixPencil& pencil, int r, const FiniteSet& set,
                                        const DistanceOptions& opt = {}) {
  detail::require(r >= 1, "tau_specified_set: r must be >= 1");
  detail::require(!set.points.empty(), "tau_specified_set: empty target set");
  for (std::size_t i = 0; i < set.points.size(); ++i) {
    for (std::size_t j = i + 1; j < set.points.size(); ++j) {
      detail::require(!detail::same_point(set.points[i], set.points[j]),
                      "tau_specified_set: target points must be distinct");
    }
  }
  detail::require_well_posed(pencil, r, opt.rank_tol);

  std::vector<Complex> pts = set.points;
  std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  const auto targets = detail::enumerate_targets(pts, r, opt.full_tuples, opt.coincident);
  std::vector<detail::Scored> cands;
  std::vector<InnerResult> inners;
  int evals = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    inners.push_back(g_of_mu(pencil, targets[i], opt.inner, opt.qualification));
    evals += inners.back().evaluations;
    cands.push_back({targets[i], inners.back().value, static_cast<int>(i)});
  }
  double lower = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) lower = std::min(lower, c.value);

  std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
    return a.value < b.value || (a.value == b.value && a.order < b.order);
  });
  DistanceResult fallback;
  bool have_fallback = false;
  int tried = 0;
  for (const auto& c : cands) {
    ++tried;
    DistanceResult res = detail::finish_candidate(pencil, c.mu, inners[c.order], set, opt);
    res.diagnostics.candidates_tried = tried;
    res.diagnostics.outer_evals = static_cast<int>(targets.size());
    res.diagnostics.inner_evaluations = evals;
    res.diagnostics.lower_bound = lower;
    res.diagnostics.stop_reason = "enumerated";
    if (res.verified) return res;
    if (!have_fallback) {
      fallback = std::move(res);
      have_fallback = true;
    }
  }
  return fallback;
}

/// Default search box for the whole plane: a square centered at the mean of
/// the finite eigenvalues of the leading m x m block of the pencil, half
/// width 2 (spread + |A|_2 / sigma_r(B)).
inline Box default_search_box(const MatrixPencil& pencil, int r,
                              double rank_tol = kDefaultRankTol) {
  const int m = pencil.cols();
  const auto pairs = generalized_eigenvalues(pencil.a().topRows(m), pencil.b().topRows(m));
  const auto finite = finite_eigenvalues(pairs, rank_tol);
  Complex center = 0.0;
  for (Complex z : finite) center += z;
  if (!finite.empty()) center /= static_cast<double>(finite.size());
  double spread = 0.0;
  for (Complex z : finite) spread = std::max(spread, std::abs(z - center));
  const RealVector sb = singular_values(pencil.b());
  const double sigma_r = sb(std::min<Eigen::Index>(r, sb.size()) - 1);
  const double half =
      2.0 * (spread + norm2(pencil.a()) / std::max(sigma_r, 1e-300 + 1e-12 * sb(0)));
  RealVector lo(2), hi(2);
  lo << center.real() - half, center.imag() - half;
  hi << center.real() + half, center.imag() + half;
  return Box(lo, hi);
}

namespace detail {

/// Maps outer coordinates to mu: (Re mu_1, Im mu_1, Re mu_2, ...) or, when
/// coincident, a single (Re, Im) pair shared by every mu_j.
inline MuVector mu_from_coords(const RealVector& x, int r, bool coincident) {
  ComplexVector v(r);
  for (int j = 0; j < r; ++j) {
    const int q = coincident ? 0 : j;
    v(j) = Complex(x(2 * q), x(2 * q + 1));
  }
  return MuVector(std::move(v));
}

inline Box outer_box(const Box& plane_box, int r, bool coincident) {
  const int blocks = coincident ? 1 : r;
  RealVector lo(2 * blocks), hi(2 * blocks);
  for (int j = 0; j < blocks; ++j) {
    lo.segment(2 * j, 2) = plane_box.lower;
    hi.segment(2 * j, 2) = plane_box.upper;
  }
  return Box(lo, hi);
}

inline Box clip_box(const RealVector& center, const RealVector& half, const Box& outer) {
  RealVector lo = (center - half).cwiseMax(outer.lower);
  RealVector hi = (center + half).cwiseMin(outer.upper);
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (hi(i) - lo(i) <= 0.0) {  // keep a sliver inside the outer box
      const double w = std::max(1e-15, 1e-9 * (outer.upper(i) - outer.lower(i)));
      lo(i) = std::max(outer.lower(i), center(i) - w);
      hi(i) = std::min(outer.upper(i), center(i) + w);
    }
  }
  return Box(lo, hi);
}

struct SearchTrace {
  std::vector<DirectSample> samples;
  RealVector best_x;
  double best_v = 0.0;
  int evals = 0;
  std::string stop_reason;
};

/// Main DIRECT run followed by the zoom rounds.
inline SearchTrace zoomed_direct(const ScalarObjective& g, const Box& box,
                                 const DistanceOptions& opt) {
  SearchTrace tr;
  DirectResult main = direct_minimize(g, box, opt.outer);
  tr.samples = std::move(main.samples);
  tr.evals = main.evals_used;
  tr.best_x = main.point;
  tr.best_v = main.value;
  tr.stop_reason = main.stop_reason;
  RealVector half = 0.5 * box.width();
  for (int round = 0; round < opt.refine_rounds; ++round) {
    half *= opt.refine_fraction;
    const Box sub = clip_box(tr.best_x, half, box);
    DirectConfig cfg = opt.outer;
    cfg.max_evals = opt.refine_evals;
    DirectResult zoom = direct_minimize(g, sub, cfg);
    tr.evals += zoom.evals_used;
    tr.samples.insert(tr.samples.end(), zoom.samples.begin(), zoom.samples.end());
    if (zoom.value < tr.best_v) {
      tr.best_v = zoom.value;
      tr.best_x = zoom.point;
    }
  }
  return tr;
}

inline DistanceResult minimize_over_box(const MatrixPencil& pencil, int r,
                                        const Box& plane_box, const TargetRegion& region,
                                        const DistanceOptions& opt) {
  require_well_posed(pencil, r, opt.rank_tol);
  const Box box = outer_box(plane_box, r, opt.coincident);
  const ScalarObjective g = [&](const RealVector& x) {
    return g_of_mu(pencil, mu_from_coords(x, r, opt.coincident), opt.inner,
                   opt.qualification)
        .value;
  };
  const SearchTrace tr = zoomed_direct(g, box, opt);

  std::vector<Scored> cands;
  cands.reserve(tr.samples.size());
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    cands.push_back({mu_from_coords(tr.samples[i].point, r, opt.coincident),
                     tr.samples[i].value, static_cast<int>(i)});
  }
  DistanceResult res = pick_verified(pencil, std::move(cands), region, opt);
  int evals = tr.evals;

  // The unconstrained minimizer may sit where no perturbation of norm g
  // exists. Search again over points that verify, with the rest lifted above
  // every verified value.
  const double slack = opt.outer.value_tol * std::max(1.0, std::abs(tr.best_v));
  if (!res.verified || res.tau > tr.best_v + slack) {
    const double lift = lipschitz_bound(pencil) * box.width().norm() + 1.0;
    const ScalarObjective h = [&](const RealVector& x) {
      const MuVector mu = mu_from_coords(x, r, opt.coincident);
      const InnerResult inner = g_of_mu(pencil, mu, opt.inner, opt.qualification);
      const DistanceResult cand = finish_candidate(pencil, mu, inner, region, opt);
      return cand.verified ? inner.value : inner.value + lift;
    };
    const SearchTrace vt = zoomed_direct(h, box, opt);
    evals += vt.evals;
    if (vt.best_v < lift) {
      const MuVector mu = mu_from_coords(vt.best_x, r, opt.coincident);
      const InnerResult inner = g_of_mu(pencil, mu, opt.inner, opt.qualification);
      DistanceResult alt = finish_candidate(pencil, mu, inner, region, opt);
      if (alt.verified && (!res.verified || alt.tau < res.tau)) {
        alt.diagnostics.candidates_tried = res.diagnostics.candidates_tried + 1;
        res = std::move(alt);
      }
    }
  }
  res.diagnostics.outer_evals = evals;
  res.diagnostics.lower_bound = tr.best_v;
  res.diagnostics.stop_reason = tr.stop_reason;
  return res;
}

}  // namespace detail

/// tau_r(Omega) for a rectangle or the closed left half-plane.
inline DistanceResult tau_region(const MatrixPencil& pencil, int r, const TargetRegion& region,
                                 const DistanceOptions& opt = {}) {
  detail::require(r >= 1, "tau_region: r must be >= 1");
  if (const auto* b = std::get_if<BoxRegion>(&region)) {
    detail::require(b->box.dim() == 2, "tau_region: region box must be 2-D (Re, Im)");
    detail::require((b->box.width().array() > 0.0).all(), "tau_region: degenerate box");
    return detail::minimize_over_box(pencil, r, b->box, region, opt);
  }
  if (const auto* h = std::get_if<LeftHalfPlane>(&region)) {
    detail::require(h->search_box.dim() == 2, "tau_region: search box must be 2-D (Re, Im)");
    RealVector lo = h->search_box.lower;
    RealVector hi = h->search_box.upper;
    hi(0) = 0.0;
    detail::require(lo(0) < 0.0 && lo(1) < hi(1),
                    "tau_region: left half-plane search box must reach Re < 0");
    return detail::minimize_over_box(pencil, r, Box(lo, hi), region, opt);
  }
  throw ContractViolation("tau_region: region must be a box or the left half-plane");
}

/// tau_r(C): the whole plane, searched over a finite box.
inline DistanceResult tau_complete(const MatrixPencil& pencil, int r, const WholePlane& region,
                                   const DistanceOptions& opt = {}) {
  detail::require(r >= 1, "tau_complete: r must be >= 1");
  detail::require_well_posed(pencil, r, opt.rank_tol);
  const Box box = region.search_box ? *region.search_box
                                    : default_search_box(pencil, r, opt.rank_tol);
  detail::require(box.dim() == 2 && (box.width().array() > 0.0).all(),
                  "tau_complete: search box must be a non-degenerate 2-D box");
  return detail::minimize_over_box(pencil, r, box, TargetRegion{region}, opt);
}

/// Dispatches on the region kind.
inline DistanceResult nearest_pencil(const DistanceQuery& q) {
  return std::visit(
      [&](const auto& reg) -> DistanceResult {
        using T = std::decay_t<decltype(reg)>;
        if constexpr (std::is_same_v<T, FiniteSet>) {
          return tau_specified_set(q.pencil, q.r, reg, q.options);
        } else if constexpr (std::is_same_v<T, WholePlane>) {
          return tau_complete(q.pencil, q.r, reg, q.options);
        } else {
          return tau_region(q.pencil, q.r, q.region, q.options);
        }
      },
      q.region);
}

}  // namespace nearpencil
