#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

using namespace nearpencil;
using nptest::random_matrix;

namespace {

DistanceOptions quick_options(int evals = 400) {
  DistanceOptions o;
  o.outer.max_evals = evals;
  o.refine_rounds = 2;
  o.refine_evals = evals / 2;
  return o;
}

Box plane(double re0, double re1, double im0, double im1) {
  RealVector lo(2), hi(2);
  lo << re0, im0;
  hi << re1, im1;
  return Box(lo, hi);
}

}  // namespace

TEST(InnerProblem, ROneHasNoGamma) {
  std::mt19937_64 rng(1);
  const MatrixPencil p(random_matrix(rng, 5, 3), random_matrix(rng, 5, 3));
  const InnerResult in = g_of_mu(p, MuVector{Complex(0.2, -1)}, BfgsConfig{});
  EXPECT_EQ(in.gamma_star.size(), 0);
  EXPECT_NEAR(in.value, sigma_min(p.a() - Complex(0.2, -1) * p.b()), 1e-12);
}

TEST(InnerProblem, PermutationConsistency) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 6; ++trial) {
    const MatrixPencil p(random_matrix(rng, 4, 3), random_matrix(rng, 4, 3));
    const Complex a = nptest::random_complex(rng), b = nptest::random_complex(rng);
    const double g1 = g_of_mu(p, MuVector{a, b}, BfgsConfig{}).value;
    const double g2 = g_of_mu(p, MuVector{b, a}, BfgsConfig{}).value;
    EXPECT_NEAR(g1, g2, 1e-6 * std::max(1.0, g1)) << "trial " << trial;
  }
}

TEST(SpecifiedSet, DiagCounterexample) {
  const MatrixPencil p = nptest::diag_counterexample();
  const DistanceResult r = tau_specified_set(p, 2, FiniteSet{{5.0, 1.0}});
  EXPECT_NEAR(r.tau, 1.0, 1e-10);
  EXPECT_EQ(r.kappa, r.tau);
  EXPECT_TRUE(r.verified);
  EXPECT_FALSE(r.mult_ok);
  ComplexMatrix want = ComplexMatrix::Zero(3, 3);
  want(2, 2) = -1;
  EXPECT_LE((r.delta_A - want).norm(), 1e-10);
  EXPECT_EQ(r.verification.perturbed_infinite_count, 1);
  auto eig = r.verification.perturbed_finite_eigenvalues;
  std::sort(eig.begin(), eig.end(), [](Complex x, Complex y) { return x.real() < y.real(); });
  ASSERT_EQ(eig.size(), 2u);
  EXPECT_NEAR(std::abs(eig[0] - 1.0), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(eig[1] - 5.0), 0.0, 1e-10);
}

TEST(SpecifiedSet, TargetsAlreadyEigenvalues) {
  const DistanceResult r =
      tau_specified_set(nptest::diag_counterexample(), 2, FiniteSet{{5.0, 2.0}});
  EXPECT_LE(r.tau, 1e-12);
  EXPECT_LE(r.delta_A.norm(), 1e-15);
  EXPECT_TRUE(r.verified);
}

TEST(SpecifiedSet, SingleTargetIsSigmaMin) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 6);
    const int n = m + static_cast<int>(rng() % 3);
    const MatrixPencil p(random_matrix(rng, n, m), random_matrix(rng, n, m));
    const Complex lam = nptest::random_complex(rng);
    const DistanceResult r = tau_specified_set(p, 1, FiniteSet{{lam}});
    EXPECT_NEAR(r.tau, sigma_min(p.a() - lam * p.b()), 1e-10);
    EXPECT_TRUE(r.verified);
    EXPECT_NEAR(norm2(r.delta_A), r.tau, 1e-8 * std::max(1e-300, r.tau));
  }
}

TEST(SpecifiedSet, MonotoneInTheSet) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 3; ++trial) {
    const MatrixPencil p(random_matrix(rng, 3, 3), random_matrix(rng, 3, 3));
    std::vector<Complex> pts;
    for (int k = 0; k < 4; ++k) pts.push_back(nptest::random_complex(rng, 2.0));
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= pts.size(); ++k) {
      const FiniteSet s{std::vector<Complex>(pts.begin(), pts.begin() + k)};
      const double tau = tau_specified_set(p, 2, s).tau;
      EXPECT_LE(tau, prev + 1e-10);
      prev = tau;
    }
  }
}

TEST(SpecifiedSet, EnumerationCounts) {
  const std::vector<Complex> pts{1.0, 2.0, 3.0};
  EXPECT_EQ(detail::enumerate_targets(pts, 2, false, false).size(), 6u);
  EXPECT_EQ(detail::enumerate_targets(pts, 3, false, false).size(), 10u);
  EXPECT_EQ(detail::enumerate_targets(pts, 2, true, false).size(), 9u);
  EXPECT_EQ(detail::enumerate_targets(pts, 2, false, true).size(), 3u);
}

TEST(SpecifiedSet, Errors) {
  const MatrixPencil p = nptest::diag_counterexample();
  EXPECT_THROW(tau_specified_set(p, 3, FiniteSet{{5.0, 1.0}}), IllPosedError);
  EXPECT_THROW(tau_specified_set(p, 2, FiniteSet{{5.0, 5.0}}), ContractViolation);
  EXPECT_THROW(tau_specified_set(p, 1, FiniteSet{}), ContractViolation);
  const MatrixPencil zero_b(ComplexMatrix::Identity(2, 2), ComplexMatrix::Zero(2, 2));
  EXPECT_THROW(tau_specified_set(zero_b, 1, FiniteSet{{0.0}}), IllPosedError);
}

TEST(Region, BoxContainingAnEigenvalue) {
  const MatrixPencil p = nptest::diag_counterexample();
  const DistanceResult r = tau_region(p, 1, BoxRegion{plane(0, 6, -1, 1)}, quick_options());
  EXPECT_LE(r.tau, 1e-6);
  EXPECT_TRUE(r.verified);
}

TEST(Region, LeftHalfPlaneSingleEigenvalue) {
  const MatrixPencil p = parse_pencil(nptest::data_path("unstable_2x2.json"));
  const DistanceResult r =
      tau_region(p, 1, LeftHalfPlane{plane(-3, 3, -3, 3)}, quick_options());
  EXPECT_TRUE(r.verified);
  for (const auto& m : r.verification.matches) EXPECT_LE(m.achieved.real(), 1e-6);
  // Brute force over the imaginary axis bounds the answer from above.
  double axis = 1e300;
  for (int k = 0; k <= 6000; ++k) {
    const double y = -3 + k * 1e-3;
    axis = std::min(axis, sigma_min(p.a() - Complex(0, y) * p.b()));
  }
  EXPECT_LE(r.tau, axis + 1e-5);
  EXPECT_GE(r.tau, axis - 1e-3);
}

TEST(Region, RejectsWrongShapes) {
  const MatrixPencil p = nptest::diag_counterexample();
  RealVector lo = RealVector::Zero(3), hi = RealVector::Ones(3);
  EXPECT_THROW(tau_region(p, 1, BoxRegion{Box(lo, hi)}), ContractViolation);
  EXPECT_THROW(tau_region(p, 1, WholePlane{}), ContractViolation);
  EXPECT_THROW(tau_region(p, 1, LeftHalfPlane{plane(1, 2, -1, 1)}), ContractViolation);
}

TEST(Complete, InvertibleBGivesZero) {
  std::mt19937_64 rng(5);
  const MatrixPencil p(random_matrix(rng, 2, 2), random_matrix(rng, 2, 2));
  const DistanceResult r = tau_complete(p, 1, WholePlane{}, quick_options());
  EXPECT_LE(r.tau, 1e-6);
  EXPECT_TRUE(r.verified);
}

TEST(Complete, DefaultBoxContainsEigenvalues) {
  std::mt19937_64 rng(6);
  const MatrixPencil p(random_matrix(rng, 4, 4), random_matrix(rng, 4, 4));
  const Box b = default_search_box(p, 2);
  for (Complex z : finite_eigenvalues(generalized_eigenvalues(p.a(), p.b()))) {
    RealVector x(2);
    x << z.real(), z.imag();
    EXPECT_TRUE(b.contains(x));
  }
}

TEST(Complete, RectangularUpperBound) {
  // Zeroing a_22 of the 4x3 example already leaves two eigenvalues, so the
  // distance is at most 0.1.
  const MatrixPencil p = parse_pencil(nptest::data_path("rectangular_4x3.json"));
  const DistanceResult r = tau_complete(p, 2, WholePlane{}, quick_options(600));
  EXPECT_TRUE(r.verified);
  EXPECT_LE(r.tau, 0.1);
  EXPECT_NEAR(norm2(r.delta_A), r.tau, 1e-8 * r.tau);
}

TEST(Perturbation, ZeroValueGivesZero) {
  ObjectiveEval e;
  e.value = 0.0;
  e.r = 1;
  EXPECT_EQ(build_perturbation(nptest::diag_counterexample(), e).norm(), 0.0);
}

TEST(Perturbation, NormEqualsKappaWhenQualified) {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 20 && checked < 4; ++trial) {
    const MatrixPencil p(random_matrix(rng, 4, 3), random_matrix(rng, 4, 3));
    const MuVector mu{nptest::random_complex(rng), nptest::random_complex(rng)};
    const InnerResult in = g_of_mu(p, mu, BfgsConfig{});
    if (!(in.eval.mult_ok && in.eval.li_ok && in.converged)) continue;
    ++checked;
    const ComplexMatrix da = build_perturbation(p, in.eval);
    EXPECT_NEAR(norm2(da), in.value, 1e-8 * in.value);
    EXPECT_LE(max_coupling(p, in.eval), 1e-6);
    EXPECT_LE(gram_mismatch(in.eval), 1e-6);
    const VerificationReport v = verify_result(p, da, mu, WholePlane{}, in.value);
    EXPECT_TRUE(v.passed);
  }
  EXPECT_GE(checked, 2);
}

TEST(Verify, UnperturbedPencilMeetingTargets) {
  const MatrixPencil p = nptest::diag_counterexample();
  const VerificationReport v =
      verify_result(p, ComplexMatrix::Zero(3, 3), MuVector{5.0, 2.0}, FiniteSet{{5.0, 2.0}}, 0.0);
  EXPECT_TRUE(v.rank_ok);
  EXPECT_TRUE(v.eigen_ok);
  EXPECT_TRUE(v.region_ok);
  EXPECT_TRUE(v.passed);
  const VerificationReport bad =
      verify_result(p, ComplexMatrix::Zero(3, 3), MuVector{5.0, 1.0}, FiniteSet{{5.0, 1.0}}, 0.0);
  EXPECT_FALSE(bad.eigen_ok);
  EXPECT_FALSE(bad.rank_ok);
  EXPECT_FALSE(bad.passed);
}

TEST(Dispatch, RoutesByRegion) {
  DistanceQuery q{nptest::diag_counterexample(), 2, FiniteSet{{5.0, 1.0}}, {}};
  EXPECT_NEAR(nearest_pencil(q).tau, 1.0, 1e-10);
}
