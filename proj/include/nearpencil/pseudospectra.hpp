#pragma once

// sigma_min(A - lambda B) on a rectangular grid of the complex plane. The
// eps-pseudospectrum is the sublevel set {lambda : value <= eps}.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "nearpencil/errors.hpp"
#include "nearpencil/numlin.hpp"
#include "nearpencil/optimize/box.hpp"
#include "nearpencil/pencil.hpp"

namespace nearpencil {

struct GridSpec {
  Box box;  // (Re, Im)
  int nx = 2;
  int ny = 2;

  void validate() const {
    box.validate();
    detail::require(box.dim() == 2, "GridSpec: box must be 2-D (Re, Im)");
    detail::require(nx >= 2 && ny >= 2, "GridSpec: nx and ny must be >= 2");
  }
  [[nodiscard]] double re(int i) const {
    return box.lower(0) + (box.upper(0) - box.lower(0)) * i / (nx - 1);
  }
  [[nodiscard]] double im(int j) const {
    return box.lower(1) + (box.upper(1) - box.lower(1)) * j / (ny - 1);
  }
  [[nodiscard]] Complex node(int i, int j) const { return {re(i), im(j)}; }
  [[nodiscard]] double dx() const { return (box.upper(0) - box.lower(0)) / (nx - 1); }
  [[nodiscard]] double dy() const { return (box.upper(1) - box.lower(1)) / (ny - 1); }
};

struct PseudospectrumGrid {
  GridSpec spec;
  Eigen::MatrixXd values;  // values(i, j) at Re index i, Im index j

  [[nodiscard]] double min_value() const { return values.minCoeff(); }
};

inline PseudospectrumGrid compute_grid(const MatrixPencil& pencil, const GridSpec& spec,
                                       int threads = 1) {
  spec.validate();
  detail::require(threads >= 1, "compute_grid: threads must be >= 1");
  PseudospectrumGrid out{spec, Eigen::MatrixXd::Zero(spec.nx, spec.ny)};
  auto column = [&](int i) {
    for (int j = 0; j < spec.ny; ++j) {
      out.values(i, j) = sigma_min(pencil.a() - spec.node(i, j) * pencil.b());
    }
  };
  const int workers = std::min(threads, spec.nx);
  if (workers == 1) {
    for (int i = 0; i < spec.nx; ++i) column(i);
    return out;
  }
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < spec.nx; i += workers) column(i);
    });
  }
  pool.clear();
  return out;
}

/// Header "re,im,sigma_min", then one row per node with Re as the outer index.
inline void write_csv(std::ostream& os, const PseudospectrumGrid& grid) {
  os << "re,im,sigma_min\n";
  char buf[128];
  for (int i = 0; i < grid.spec.nx; ++i) {
    for (int j = 0; j < grid.spec.ny; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", grid.spec.re(i), grid.spec.im(j),
                    grid.values(i, j));
      os << buf;
    }
  }
}

/// Smallest eps at which the sublevel sets around nodes `a` and `b` join,
/// found by adding nodes in increasing value and merging 4-neighbours.
inline double merge_level(const PseudospectrumGrid& grid, std::pair<int, int> a,
                          std::pair<int, int> b) {
  const int nx = grid.spec.nx;
  const int ny = grid.spec.ny;
  const int total = nx * ny;
  std::vector<int> order(total);
  for (int k = 0; k < total; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](int p, int q) {
    return grid.values(p / ny, p % ny) < grid.values(q / ny, q % ny);
  });
  std::vector<int> parent(total, -1);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const int ia = a.first * ny + a.second;
  const int ib = b.first * ny + b.second;
  for (int k : order) {
    parent[k] = k;
    const int i = k / ny;
    const int j = k % ny;
    const int nbr[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (const auto& q : nbr) {
      if (q[0] < 0 || q[0] >= nx || q[1] < 0 || q[1] >= ny) continue;
      const int kk = q[0] * ny + q[1];
      if (parent[kk] < 0) continue;
      parent[find(kk)] = find(k);
    }
    if (parent[ia] >= 0 && parent[ib] >= 0 && find(ia) == find(ib)) {
      return grid.values(i, j);
    }
  }
  return grid.values.maxCoeff();
}

/// Grid node closest to z.
inline std::pair<int, int> nearest_node(const GridSpec& spec, Complex z) {
  auto clampi = [](double v, int n) {
    return std::clamp(static_cast<int>(std::lround(v)), 0, n - 1);
  };
  return {clampi((z.real() - spec.box.lower(0)) / spec.dx(), spec.nx),
          clampi((z.imag() - spec.box.lower(1)) / spec.dy(), spec.ny)};
}

}  // namespace nearpencil
