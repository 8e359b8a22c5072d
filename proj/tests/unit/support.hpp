#pragma once

#include <complex>
#include <random>
#include <string>

#include "nearpencil/nearpencil.hpp"

namespace nptest {

using nearpencil::Complex;
using nearpencil::ComplexMatrix;

inline std::string data_path(const std::string& name) {
  return std::string(NEARPENCIL_DATA_DIR) + "/" + name;
}

inline ComplexMatrix random_matrix(std::mt19937_64& rng, int n, int m) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix a(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) a(i, j) = Complex(normal(rng), normal(rng));
  }
  return a;
}

inline nearpencil::MatrixPencil random_pencil(std::mt19937_64& rng, int n, int m) {
  return {random_matrix(rng, n, m), random_matrix(rng, n, m)};
}

inline Complex random_complex(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  return {normal(rng), normal(rng)};
}

/// A = diag(-1, 5, 2), B = diag(0, 1, 1).
inline nearpencil::MatrixPencil diag_counterexample() {
  ComplexMatrix a = ComplexMatrix::Zero(3, 3);
  ComplexMatrix b = ComplexMatrix::Zero(3, 3);
  a(0, 0) = -1;
  a(1, 1) = 5;
  a(2, 2) = 2;
  b(1, 1) = 1;
  b(2, 2) = 1;
  return {a, b};
}

/// Smallest singular value of the diagonal example at mu = (5, 1) as a
/// function of |gamma|, from the 2 x 2 blocks of L.
inline double diag_closed_form(double t) {
  return std::sqrt(5.0 + 0.5 * t * t - 0.5 * std::sqrt(t * t * t * t + 20.0 * t * t + 64.0));
}

}  // namespace nptest
