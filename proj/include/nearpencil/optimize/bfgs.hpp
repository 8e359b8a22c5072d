#pragma once

// BFGS maximization with a weak Wolfe line search (bisection/expansion in
// the style of Lewis and Overton, which tolerates the kinks of nonsmooth
// spectral functions). Internally the method minimizes -f.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>

#include "nearpencil/errors.hpp"
#include "nearpencil/numlin.hpp"

namespace nearpencil {

struct BfgsConfig {
  int max_iters = 500;
  double grad_tol = 1e-8;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_restarts = 5;
  double initial_step = 1.0;
  int max_line_search_steps = 60;
  std::uint64_t seed = 20130917;

  void validate() const {
    detail::require(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0,
                    "BfgsConfig: need 0 < c1 < c2 < 1");
    detail::require(max_iters >= 0 && max_restarts >= 0,
                    "BfgsConfig: iteration counts must be non-negative");
    detail::require(grad_tol >= 0.0 && initial_step > 0.0,
                    "BfgsConfig: grad_tol >= 0 and initial_step > 0 required");
  }
};

struct ValueAndGradient {
  double value = 0.0;
  RealVector gradient;
};

using SmoothObjective = std::function<ValueAndGradient(const RealVector&)>;
/// Decides whether a stationary point is good enough to stop restarting.
using PointAcceptor = std::function<bool(const RealVector&)>;

struct BfgsResult {
  RealVector point;
  double value = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;  // gradient norm <= grad_tol at `point`
  bool accepted = true;    // acceptor verdict at `point` (true if none given)
  int n_restarts = 0;
  int iterations = 0;
  int evaluations = 0;
};

namespace detail {

enum class BfgsStop { kConverged, kLineSearchFailed, kStalled, kMaxIters };

struct LocalRun {
  RealVector point;
  double value = 0.0;
  RealVector gradient;
  BfgsStop stop = BfgsStop::kMaxIters;
  int iterations = 0;
  int evaluations = 0;
};

inline LocalRun bfgs_local(const SmoothObjective& f, const RealVector& start,
                           const BfgsConfig& cfg) {
  const Eigen::Index d = start.size();
  LocalRun run;
  run.point = start;
  ValueAndGradient cur = f(start);
  ++run.evaluations;
  // phi = -f is minimized.
  double phi = -cur.value;
  RealVector gphi = -cur.gradient;
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(d, d);
  bool scaled = false;

  for (int it = 0; it < cfg.max_iters; ++it) {
    run.iterations = it;
    if (gphi.norm() <= cfg.grad_tol) {
      run.stop = BfgsStop::kConverged;
      break;
    }
    RealVector dir = -h * gphi;
    double slope = dir.dot(gphi);
    if (!(slope < 0.0)) {
      h.setIdentity();
      scaled = false;
      dir = -gphi;
      slope = dir.dot(gphi);
    }

    // Weak Wolfe: phi(t) <= phi(0) + c1 t slope and phi'(t) >= c2 slope.
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double t = cfg.initial_step;
    bool found = false;
    RealVector x_new;
    ValueAndGradient trial;
    RealVector lo_x;
    ValueAndGradient lo_val;
    for (int ls = 0; ls < cfg.max_line_search_steps; ++ls) {
      x_new = run.point + t * dir;
      trial = f(x_new);
      ++run.evaluations;
      const double phi_t = -trial.value;
      if (!std::isfinite(phi_t) || phi_t > phi + cfg.wolfe_c1 * t * slope) {
        hi = t;
      } else if (-trial.gradient.dot(dir) < cfg.wolfe_c2 * slope) {
        lo = t;
        lo_x = x_new;
        lo_val = trial;
      } else {
        found = true;
        break;
      }
      t = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * t;
    }
    if (!found) {
      if (lo > 0.0) {
        x_new = lo_x;
        trial = lo_val;
      } else {
        // Steepest ascent from a fresh Hessian found nothing: a kink or a
        // numerically flat maximum. Resetting again would repeat this.
        run.stop = it == 0 ? BfgsStop::kStalled : BfgsStop::kLineSearchFailed;
        break;
      }
    }

    const RealVector s = x_new - run.point;
    const RealVector g_new = -trial.gradient;
    const RealVector y = g_new - gphi;
    const double sy = s.dot(y);
    run.point = x_new;
    phi = -trial.value;
    gphi = g_new;
    if (sy > 1e-300) {
      if (!scaled) {
        h *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
      h = (id - rho * s * y.transpose()) * h * (id - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    if (s.norm() <= 1e-15 * (1.0 + run.point.norm())) {
      run.stop = BfgsStop::kStalled;
      break;
    }
    run.iterations = it + 1;
  }
  if (run.stop == BfgsStop::kMaxIters && gphi.norm() <= cfg.grad_tol) {
    run.stop = BfgsStop::kConverged;
  }
  run.value = -phi;
  run.gradient = -gphi;
  return run;
}

}  // namespace detail

/// Maximizes f from `start`. On line-search failure the inverse Hessian is
/// reset and the run continues from the current point; when `accept` rejects
/// a stationary point the run restarts from a random perturbation of radius
/// 0.1 (1 + |x|). Both kinds of restart draw on cfg.max_restarts. The best
/// point visited across all runs is returned.
inline BfgsResult bfgs_maximize(const SmoothObjective& f, const RealVector& start,
                                const BfgsConfig& cfg, const PointAcceptor& accept = {}) {
  cfg.validate();
  BfgsResult best;
  if (start.size() == 0) {
    const ValueAndGradient v = f(start);
    best.point = start;
    best.value = v.value;
    best.converged = true;
    best.accepted = accept ? accept(start) : true;
    best.evaluations = 1;
    return best;
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  bool have_best = false;
  RealVector x = start;
  int restarts = 0;
  int evaluations = 0;
  int iterations = 0;
  while (true) {
    const detail::LocalRun run = detail::bfgs_local(f, x, cfg);
    evaluations += run.evaluations;
    iterations += run.iterations;
    const bool converged = run.stop == detail::BfgsStop::kConverged;
    bool accepted = true;
    if (converged || run.stop == detail::BfgsStop::kStalled) {
      accepted = accept ? accept(run.point) : true;
    }
    if (!have_best || run.value > best.value) {
      have_best = true;
      best.point = run.point;
      best.value = run.value;
      best.gradient_norm = run.gradient.norm();
      best.converged = converged;
      best.accepted = accepted;
    }
    if (restarts >= cfg.max_restarts) break;
    if (run.stop == detail::BfgsStop::kLineSearchFailed) {
      ++restarts;
      x = run.point;
      continue;
    }
    if (!accepted) {
      ++restarts;
      RealVector kick(x.size());
      for (Eigen::Index i = 0; i < kick.size(); ++i) kick(i) = unif(rng);
      const double radius = 0.1 * (1.0 + run.point.norm());
      const double kn = kick.norm();
      x = run.point + (kn > 0.0 ? radius / kn : 0.0) * kick;
      continue;
    }
    break;
  }
  best.n_restarts = restarts;
  best.evaluations = evaluations;
  best.iterations = iterations;
  return best;
}

}  // namespace nearpencil
