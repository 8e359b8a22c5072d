#pragma once

// DIRECT (DIviding RECTangles, Jones, Perttunen and Stuckman 1993).
//
// The box is mapped to the unit hypercube. Every rectangle is sampled at its
// center; each iteration selects the potentially optimal rectangles (lower
// right convex hull of (diameter, value) with the epsilon improvement test)
// and trisects them along their longest sides, best direction first.
// Deterministic: no randomness, fixed tie breaking by rectangle id, and
// parallel evaluation is merged in a fixed order.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "nearpencil/errors.hpp"
#include "nearpencil/numlin.hpp"
#include "nearpencil/optimize/box.hpp"

namespace nearpencil {

struct DirectConfig {
  int max_evals = 2000;
  double box_size_tol = 1e-6;  // stop once the smallest selected diameter drops below
  double value_tol = 1e-4;     // epsilon of the potential-optimality test
  std::optional<double> lipschitz_hint;
  int threads = 1;

  void validate() const {
    detail::require(max_evals >= 1, "DirectConfig: max_evals must be >= 1");
    detail::require(box_size_tol > 0.0 && value_tol > 0.0,
                    "DirectConfig: tolerances must be positive");
    detail::require(!lipschitz_hint || *lipschitz_hint >= 0.0,
                    "DirectConfig: lipschitz_hint must be non-negative");
    detail::require(threads >= 1, "DirectConfig: threads must be >= 1");
  }
};

struct DirectSample {
  RealVector point;
  double value = 0.0;
};

struct DirectResult {
  RealVector point;
  double value = std::numeric_limits<double>::infinity();
  int evals_used = 0;
  int iterations = 0;
  std::string stop_reason;
  std::vector<DirectSample> samples;  // every evaluation, in evaluation order
};

using ScalarObjective = std::function<double(const RealVector&)>;

namespace detail {

struct DirectRect {
  RealVector center;       // unit-cube coordinates
  Eigen::VectorXi level;   // side along dim i is 3^-level(i)
  double value = 0.0;
  int id = 0;
};

inline std::vector<int> sorted_levels(const Eigen::VectorXi& level) {
  std::vector<int> key(level.data(), level.data() + level.size());
  std::sort(key.begin(), key.end());
  return key;
}

inline double unit_diameter(const std::vector<int>& key) {
  double s = 0.0;
  for (int k : key) s += std::pow(3.0, -2.0 * k);
  return 0.5 * std::sqrt(s);
}

/// Center-to-vertex distance in the caller's coordinates.
inline double scaled_diameter(const Eigen::VectorXi& level, const RealVector& width) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < level.size(); ++i) {
    const double side = std::pow(3.0, -static_cast<double>(level(i))) * width(i);
    s += side * side;
  }
  return 0.5 * std::sqrt(s);
}

inline void evaluate_batch(const ScalarObjective& g, const std::vector<RealVector>& xs,
                           std::vector<double>& out, int threads) {
  out.assign(xs.size(), 0.0);
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(xs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = g(xs[i]);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < xs.size(); i += workers) out[i] = g(xs[i]);
    });
  }
}

}  // namespace detail

inline DirectResult direct_minimize(const ScalarObjective& g, const Box& box,
                                    const DirectConfig& cfg) {
  cfg.validate();
  box.validate();
  const int dim = box.dim();
  detail::require(dim >= 1, "direct_minimize: dimension must be >= 1");
  const RealVector width = box.width();
  detail::require((width.array() > 0.0).all(),
                  "direct_minimize: box has a zero-width side");

  auto to_box = [&](const RealVector& unit) -> RealVector {
    return box.lower + unit.cwiseProduct(width);
  };

  DirectResult res;
  std::vector<detail::DirectRect> rects;
  int next_id = 0;
  int best = -1;

  auto record = [&](const RealVector& unit, const Eigen::VectorXi& level, double value) {
    detail::DirectRect rc{unit, level, value, next_id++};
    rects.push_back(rc);
    res.samples.push_back({to_box(unit), value});
    const int idx = static_cast<int>(rects.size()) - 1;
    if (best < 0 || value < rects[best].value) best = idx;
    return idx;
  };

  {
    const RealVector c = RealVector::Constant(dim, 0.5);
    record(c, Eigen::VectorXi::Zero(dim), g(to_box(c)));
  }
  int evals = 1;

  while (true) {
    if (evals >= cfg.max_evals) {
      res.stop_reason = "max_evals";
      break;
    }
    const double fmin = rects[best].value;

    // Best rectangle per diameter class; ties go to the lowest id.
    std::map<std::vector<int>, int> classes;
    for (int i = 0; i < static_cast<int>(rects.size()); ++i) {
      auto key = detail::sorted_levels(rects[i].level);
      auto it = classes.find(key);
      if (it == classes.end()) {
        classes.emplace(std::move(key), i);
      } else {
        const auto& cur = rects[it->second];
        if (rects[i].value < cur.value) it->second = i;
      }
    }
    struct Cand {
      double d;
      double f;
      int idx;
    };
    std::vector<Cand> cands;
    cands.reserve(classes.size());
    for (const auto& [key, idx] : classes) {
      cands.push_back({detail::unit_diameter(key), rects[idx].value, idx});
    }

    std::vector<int> selected;
    for (std::size_t j = 0; j < cands.size(); ++j) {
      double k_low = -std::numeric_limits<double>::infinity();
      double k_up = std::numeric_limits<double>::infinity();
      bool ok = true;
      for (std::size_t i = 0; i < cands.size() && ok; ++i) {
        if (i == j) continue;
        const double dd = cands[j].d - cands[i].d;
        if (dd > 0.0) {
          k_low = std::max(k_low, (cands[j].f - cands[i].f) / dd);
        } else if (dd < 0.0) {
          k_up = std::min(k_up, (cands[i].f - cands[j].f) / -dd);
        }
      }
      if (!(k_up > 0.0) || k_low > k_up) ok = false;
      if (ok && std::isfinite(k_up)) {
        ok = cands[j].f - k_up * cands[j].d <= fmin - cfg.value_tol * std::abs(fmin);
      }
      if (ok) selected.push_back(cands[j].idx);
    }

    if (cfg.lipschitz_hint) {
      const double lip = *cfg.lipschitz_hint;
      double lower = std::numeric_limits<double>::infinity();
      for (const auto& rc : rects) {
        lower = std::min(lower, rc.value - lip * detail::scaled_diameter(rc.level, width));
      }
      if (lower >= fmin - cfg.value_tol) {
        res.stop_reason = "lipschitz_certified";
        break;
      }
      std::erase_if(selected, [&](int idx) {
        return rects[idx].value - lip * detail::scaled_diameter(rects[idx].level, width) >
               fmin;
      });
    }
    if (selected.empty()) {
      res.stop_reason = "no_candidates";
      break;
    }
    std::sort(selected.begin(), selected.end(),
              [&](int a, int b) { return rects[a].id < rects[b].id; });

    double smallest = std::numeric_limits<double>::infinity();
    for (int idx : selected) {
      smallest = std::min(smallest, detail::scaled_diameter(rects[idx].level, width));
    }
    if (smallest < cfg.box_size_tol) {
      res.stop_reason = "box_size";
      break;
    }

    // Sample c +- delta e_i along every longest side of every selected
    // rectangle, as far as the budget allows.
    struct Plan {
      int rect;
      std::vector<int> dims;
      std::size_t first;  // offset into the batch
    };
    std::vector<Plan> plans;
    std::vector<RealVector> batch;
    for (int idx : selected) {
      const auto& rc = rects[idx];
      const int min_level = rc.level.minCoeff();
      std::vector<int> dims;
      for (int i = 0; i < dim; ++i) {
        if (rc.level(i) == min_level) dims.push_back(i);
      }
      if (evals + static_cast<int>(batch.size() + 2 * dims.size()) > cfg.max_evals) break;
      const double delta = std::pow(3.0, -static_cast<double>(min_level + 1));
      plans.push_back({idx, dims, batch.size()});
      for (int i : dims) {
        RealVector plus = rc.center;
        RealVector minus = rc.center;
        plus(i) += delta;
        minus(i) -= delta;
        batch.push_back(plus);
        batch.push_back(minus);
      }
    }
    if (plans.empty()) {
      res.stop_reason = "max_evals";
      break;
    }

    std::vector<RealVector> mapped;
    mapped.reserve(batch.size());
    for (const auto& u : batch) mapped.push_back(to_box(u));
    std::vector<double> values;
    detail::evaluate_batch(g, mapped, values, cfg.threads);
    evals += static_cast<int>(batch.size());

    for (const auto& plan : plans) {
      const int k = static_cast<int>(plan.dims.size());
      std::vector<int> order(k);
      std::vector<double> w(k);
      for (int q = 0; q < k; ++q) {
        order[q] = q;
        w[q] = std::min(values[plan.first + 2 * q], values[plan.first + 2 * q + 1]);
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return w[a] < w[b]; });
      Eigen::VectorXi level = rects[plan.rect].level;
      for (int q : order) {
        level(plan.dims[q]) += 1;
        record(batch[plan.first + 2 * q], level, values[plan.first + 2 * q]);
        record(batch[plan.first + 2 * q + 1], level, values[plan.first + 2 * q + 1]);
      }
      rects[plan.rect].level = level;
    }
    ++res.iterations;
  }

  res.point = to_box(rects[best].center);
  res.value = rects[best].value;
  res.evals_used = evals;
  return res;
}

}  // namespace nearpencil
