/*
 Copyright 2026 The ddpc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

// Open-loop quadratic tracking task over a finite horizon, its model-based
// optimum and the suboptimality gap of any candidate input.

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "ddpc/lti.hpp"
#include "ddpc/matops.hpp"

namespace ddpc {

/// Stage weights q_t, r_t (strictly positive) and a constant scalar reference.
/// Cost: F(u, y) = u^T diag(q) u + (y - y_ref)^T diag(r) (y - y_ref).
class ControlTask {
 public:
  ControlTask(Vector q, Vector r, double y_ref) : q_(std::move(q)), r_(std::move(r)), y_ref_(y_ref) {
    if (q_.size() < 1) throw DimensionError("ControlTask: horizon must be >= 1");
    if (r_.size() != q_.size()) throw DimensionError("ControlTask: q and r lengths differ");
    if (!q_.allFinite() || !r_.allFinite() || !std::isfinite(y_ref_)) {
      throw InvalidArgument("ControlTask: weights and reference must be finite");
    }
    if ((q_.array() <= 0).any()) throw InvalidArgument("ControlTask: every q_t must be > 0");
    if ((r_.array() <= 0).any()) throw InvalidArgument("ControlTask: every r_t must be > 0");
  }

  static ControlTask uniform(Eigen::Index horizon, double q, double r, double y_ref) {
    if (horizon < 1) throw DimensionError("ControlTask: horizon must be >= 1");
    return {Vector::Constant(horizon, q), Vector::Constant(horizon, r), y_ref};
  }

  Eigen::Index horizon() const { return q_.size(); }
  const Vector& q() const { return q_; }
  const Vector& r() const { return r_; }
  double y_ref() const { return y_ref_; }
  Vector reference() const { return Vector::Constant(horizon(), y_ref_); }

 private:
  Vector q_;
  Vector r_;
  double y_ref_;
};

namespace detail {
inline void check_length(const ControlTask& task, Eigen::Index len, const char* what) {
  if (len != task.horizon()) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(task.horizon()) +
                         ", got " + std::to_string(len));
  }
}
inline void check_square(const ControlTask& task, const Matrix& g, const char* what) {
  if (g.rows() != task.horizon() || g.cols() != task.horizon()) {
    throw DimensionError(std::string(what) + ": model must be T x T");
  }
}
}  // namespace detail

inline double cost_F(const ControlTask& task, const Eigen::Ref<const Vector>& u,
                     const Eigen::Ref<const Vector>& y) {
  detail::check_length(task, u.size(), "cost_F(u)");
  detail::check_length(task, y.size(), "cost_F(y)");
  const Vector e = y - task.reference();
  return u.cwiseAbs2().dot(task.q()) + e.cwiseAbs2().dot(task.r());
}

/// Q + G^T R G, the (half) Hessian of u -> F(u, G u).
inline Matrix task_hessian(const ControlTask& task, const Matrix& g) {
  detail::check_square(task, g, "task_hessian");
  Matrix h = g.transpose() * task.r().asDiagonal() * g;
  h.diagonal() += task.q();
  return h;
}

/// Minimizer of F(u, G u): (Q + G^T R G)^{-1} G^T R y_ref.
inline Vector optimal_input(const ControlTask& task, const Matrix& g) {
  ensure_finite(g, "optimal_input: model");
  const Matrix h = task_hessian(task, g);
  const Vector rhs = g.transpose() * (task.r().cwiseProduct(task.reference()));
  Eigen::LLT<Matrix> llt(h);
  if (llt.info() != Eigen::Success) {
    // Only reachable when G is so large that Q is lost to rounding.
    return h.ldlt().solve(rhs);
  }
  return llt.solve(rhs);
}

/// Same formula applied to an estimated model.
inline Vector certainty_equivalent_input(const ControlTask& task, const Matrix& g_hat) {
  return optimal_input(task, g_hat);
}

struct DesignOutcome {
  Vector u_hat;
  double gap = 0.0;
  double distance_to_optimum = 0.0;
};

/// Caches u* and F(P u*) for repeated gap evaluations against one true model.
class GapEvaluator {
 public:
  GapEvaluator(const ControlTask& task, Matrix g)
      : task_(task), g_(std::move(g)), u_star_(ddpc::optimal_input(task_, g_)),
        optimal_cost_(cost_F(task_, u_star_, g_ * u_star_)) {}

  const ControlTask& task() const { return task_; }
  const Matrix& model() const { return g_; }
  const Vector& optimal_input() const { return u_star_; }
  double optimal_cost() const { return optimal_cost_; }

  /// F(P u_hat) - F(P u*). Round-off negatives down to
  /// -1e-12 * max(1, F(P u*)) are clamped to zero; anything lower throws.
  DesignOutcome evaluate(const Eigen::Ref<const Vector>& u_hat) const {
    detail::check_length(task_, u_hat.size(), "suboptimality_gap");
    double gap = cost_F(task_, u_hat, g_ * u_hat) - optimal_cost_;
    if (!std::isfinite(gap)) throw ConsistencyError("suboptimality_gap: non-finite gap");
    if (gap < 0) {
      if (gap < -1e-12 * std::max(1.0, optimal_cost_)) {
        throw ConsistencyError("suboptimality_gap: negative gap " + std::to_string(gap) +
                               "; optimal_input is not optimal");
      }
      gap = 0.0;
    }
    return {u_hat, gap, (u_hat - u_star_).norm()};
  }

 private:
  ControlTask task_;
  Matrix g_;
  Vector u_star_;
  double optimal_cost_;
};

inline DesignOutcome suboptimality_gap(const ControlTask& task, const Matrix& g,
                                       const Eigen::Ref<const Vector>& u_hat) {
  return GapEvaluator(task, g).evaluate(u_hat);
}

/// Extreme eigenvalues of Q + G^T R G. The gap of any input satisfies
/// mu * d^2 <= Gap <= nu * d^2 with d = |u_hat - u*|; as moduli of
/// u -> F(u, G u) (whose Hessian is twice this matrix) they are 2 mu and 2 nu.
struct ConvexityConstants {
  double mu = 0.0;
  double nu = 0.0;

  double strong_convexity_modulus() const { return 2.0 * mu; }
  double smoothness_modulus() const { return 2.0 * nu; }
};

inline ConvexityConstants convexity_constants(const ControlTask& task, const Matrix& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(task_hessian(task, g), Eigen::EigenvaluesOnly);
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  int trials = 0;
};

/// Sample mean of F(u, G u + v) over fresh draws v = G' w.
template <class Urbg>
MonteCarloEstimate montecarlo_expected_cost(const ControlTask& task, const Matrix& g,
                                            const Matrix& g_prime, const LtiSystem& sys,
                                            const Eigen::Ref<const Vector>& u, int trials,
                                            Urbg& rng) {
  if (trials < 1) throw InvalidArgument("montecarlo_expected_cost: trials must be >= 1");
  detail::check_square(task, g, "montecarlo_expected_cost");
  const Eigen::Index horizon = task.horizon();
  if (g_prime.rows() != horizon || g_prime.cols() != sys.order() * horizon) {
    throw DimensionError("montecarlo_expected_cost: G' must be T x nT");
  }
  const Vector y_nominal = g * u;
  // Welford accumulation.
  double mean = 0.0;
  double m2 = 0.0;
  for (int k = 0; k < trials; ++k) {
    const Matrix w = draw_process_noise(sys, horizon, rng);
    const Vector v = g_prime * w.reshaped();
    const double f = cost_F(task, u, y_nominal + v);
    const double delta = f - mean;
    mean += delta / (k + 1);
    m2 += delta * (f - mean);
  }
  const double se = trials > 1 ? std::sqrt(m2 / (trials - 1) / trials) : 0.0;
  return {mean, se, trials};
}

}  // namespace ddpc
