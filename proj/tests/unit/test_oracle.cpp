#include <gtest/gtest.h>

#include "support.hpp"

using namespace nearpencil;
using nptest::random_matrix;

namespace {

JordanSpec spec(std::initializer_list<JordanBlock> blocks) { return JordanSpec{blocks}; }

/// Random Jordan structure over a small eigenvalue pool so that F and G
/// share eigenvalues often.
JordanSpec random_spec(std::mt19937_64& rng, int total) {
  static const Complex pool[3] = {{0, 0}, {1, 0}, {-1, 2}};
  JordanSpec s;
  int left = total;
  while (left > 0) {
    const int size = 1 + static_cast<int>(rng() % left);
    s.blocks.push_back({pool[rng() % 3], size});
    left -= size;
  }
  return s;
}

/// S^{-1} J S for a random well-conditioned S.
ComplexMatrix disguise(std::mt19937_64& rng, const ComplexMatrix& j) {
  const int n = static_cast<int>(j.rows());
  const ComplexMatrix s = ComplexMatrix::Identity(n, n) + 0.3 * random_matrix(rng, n, n) / n;
  return s.inverse() * j * s;
}

}  // namespace

TEST(SylvesterFormula, Examples) {
  EXPECT_EQ(sylvester_dimension_formula(spec({{0.0, 2}}), spec({{0.0, 2}})), 2);
  EXPECT_EQ(sylvester_dimension_formula(spec({{0.0, 2}}), spec({{0.0, 1}})), 1);
  EXPECT_EQ(sylvester_dimension_formula(spec({{0.0, 2}}), spec({{1.0, 3}})), 0);
  EXPECT_EQ(sylvester_dimension_formula(spec({{1.0, 1}, {1.0, 1}}), spec({{1.0, 1}, {1.0, 1}})),
            4);
}

TEST(SylvesterBruteForce, Examples) {
  EXPECT_EQ(sylvester_dimension_bruteforce(ComplexMatrix::Identity(2, 2),
                                           ComplexMatrix::Identity(2, 2)),
            4);
  std::mt19937_64 rng(1);
  ComplexMatrix f = random_matrix(rng, 3, 3);
  ComplexMatrix g = random_matrix(rng, 2, 2) + 10.0 * ComplexMatrix::Identity(2, 2);
  EXPECT_EQ(sylvester_dimension_bruteforce(f, g), 0);
  EXPECT_EQ(sylvester_dimension_bruteforce(jordan_matrix(spec({{0.0, 2}})),
                                           jordan_matrix(spec({{0.0, 1}}))),
            1);
}

TEST(SylvesterOracles, AgreeOnRandomJordanPairs) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int total = 2 + static_cast<int>(rng() % 7);
    const int p = 1 + static_cast<int>(rng() % (total - 1));
    const JordanSpec fs = random_spec(rng, p);
    const JordanSpec gs = random_spec(rng, total - p);
    const int formula = sylvester_dimension_formula(fs, gs);
    EXPECT_EQ(sylvester_dimension_bruteforce(jordan_matrix(fs), jordan_matrix(gs)), formula)
        << "trial " << trial;
  }
}

TEST(GeneralizedSylvester, DiagCounterexample) {
  const MatrixPencil p = nptest::diag_counterexample();
  EXPECT_EQ(generic_sylvester_dimension(p, MuVector{5.0, 1.0}, 3), 1);
  ComplexMatrix da = ComplexMatrix::Zero(3, 3);
  da(2, 2) = -1;
  EXPECT_GE(generic_sylvester_dimension(p.perturbed(da), MuVector{5.0, 1.0}, 3), 2);
  EXPECT_EQ(generic_sylvester_dimension(p, MuVector{7.0, -3.0}, 3), 0);
}

TEST(GeneralizedSylvester, CountingCriterionOnDiagonalPencils) {
  // A = diag(a), B = I: sum of multiplicities over S reaches r exactly when
  // some multiset of S of size r gives a solution space of dimension >= r.
  std::mt19937_64 rng(4);
  const Complex pool[4] = {{0, 0}, {1, 0}, {2, 1}, {-1, 0}};
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    ComplexMatrix a = ComplexMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) a(i, i) = pool[rng() % 4];
    const MatrixPencil p(a, ComplexMatrix::Identity(n, n));
    std::vector<Complex> s{pool[rng() % 4]};
    const Complex extra = pool[rng() % 4];
    if (std::abs(extra - s[0]) > 0) s.push_back(extra);
    const int r = 1 + static_cast<int>(rng() % n);
    int count = 0;
    for (Complex z : s) {
      for (int i = 0; i < n; ++i) count += std::abs(a(i, i) - z) == 0.0 ? 1 : 0;
    }
    bool some = false;
    for (const MuVector& mu : detail::enumerate_targets(s, r, false, false)) {
      some = some || generic_sylvester_dimension(p, mu, 10 + trial) >= r;
    }
    EXPECT_EQ(count >= r, some) << "trial " << trial;
  }
}

TEST(FdGradient, ROneIsEmpty) {
  EXPECT_EQ(fd_gradient(nptest::diag_counterexample(), MuVector{1.0}, GammaVector(1), 1e-6).size(),
            0);
  EXPECT_THROW(fd_gradient(nptest::diag_counterexample(), MuVector{1.0}, GammaVector(1), 0.0),
               ContractViolation);
}

TEST(FdGradient, DiagClosedFormSlope) {
  const MatrixPencil p = nptest::diag_counterexample();
  GammaVector g(2);
  g(1, 0) = 2.0;
  const double h = 1e-6;
  const double want =
      (nptest::diag_closed_form(2.0 + h) - nptest::diag_closed_form(2.0 - h)) / (2 * h);
  const RealVector fd = fd_gradient(p, MuVector{5.0, 1.0}, g, h);
  EXPECT_NEAR(fd(0), want, 1e-7);
  EXPECT_NEAR(fd(1), 0.0, 1e-7);
  EXPECT_NEAR(gamma_gradient(p, MuVector{5.0, 1.0}, g)(0), want, 1e-7);
}

TEST(DecayProbe, DiagCounterexample) {
  const MatrixPencil p = nptest::diag_counterexample();
  GammaVector dir(2);
  dir(1, 0) = 1.0;
  const auto v = gamma_decay_probe(p, MuVector{5.0, 1.0}, dir, {0.0, 100.0});
  EXPECT_NEAR(v[0], 1.0, 1e-12);
  EXPECT_NEAR(v[1], nptest::diag_closed_form(100.0), 1e-10);
  EXPECT_NEAR(v[1], 0.030, 5e-4);
}

TEST(DecayProbe, RandomSquarePencils) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const MatrixPencil p(random_matrix(rng, n, n), random_matrix(rng, n, n));
    const MuVector mu{nptest::random_complex(rng), nptest::random_complex(rng)};
    GammaVector dir(2);
    dir(1, 0) = nptest::random_complex(rng);
    const auto v = gamma_decay_probe(p, mu, dir, {1.0, 1e4});
    EXPECT_LT(v[1], 0.01 * v[0]);
  }
}

TEST(DecayProbe, Preconditions) {
  std::mt19937_64 rng(6);
  const MatrixPencil rect(random_matrix(rng, 4, 3), random_matrix(rng, 4, 3));
  GammaVector dir(2);
  dir(1, 0) = 1.0;
  EXPECT_THROW(gamma_decay_probe(rect, MuVector{0.0, 1.0}, dir, {1.0}), ContractViolation);
  EXPECT_THROW(gamma_decay_probe(nptest::diag_counterexample(), MuVector{0.0, 1.0}, GammaVector(2),
                                 {1.0}),
               ContractViolation);
}
