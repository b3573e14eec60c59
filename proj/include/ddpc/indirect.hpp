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

// Indirect design: identify a delay-operator (kernel) model of order L from
// Hankel-reorganized data by constrained OLS, then apply the
// certainty-equivalent input to the assembled T x T model.

#include <string>

#include "ddpc/direct.hpp"
#include "ddpc/lti.hpp"
#include "ddpc/matops.hpp"
#include "ddpc/task.hpp"

namespace ddpc {

/// Scalar kernel coefficients of order L:
///
///   sum_{k=1..L} m_k y_{t-k+1} + sum_{k=1..L} n_k u_{t-k} = 0,
///
/// with m_1 = 1 (most recent output) and n_L = 0 (no feedthrough).
class KernelModel {
 public:
  KernelModel(Vector m, Vector n) : m_(std::move(m)), n_(std::move(n)) {
    if (m_.size() < 1 || m_.size() != n_.size()) {
      throw DimensionError("KernelModel: m and n must have the same length L >= 1");
    }
    if (m_(0) != 1.0) throw InvalidArgument("KernelModel: m_1 must equal 1");
    if (n_(n_.size() - 1) != 0.0) throw InvalidArgument("KernelModel: n_L must equal 0");
    ensure_finite(m_, "m");
    ensure_finite(n_, "n");
  }

  Eigen::Index order() const { return m_.size(); }
  /// (m_1, ..., m_L)
  const Vector& m() const { return m_; }
  /// (n_1, ..., n_L)
  const Vector& n() const { return n_; }

  /// Stacked (n_L..n_1, m_L..m_1), the ordering paired with [H_u; H_y].
  Vector stacked() const {
    const Eigen::Index l = order();
    Vector theta(2 * l);
    theta.head(l) = n_.reverse();
    theta.tail(l) = m_.reverse();
    return theta;
  }

 private:
  Vector m_;
  Vector n_;
};

/// Depth-L Hankel blocks of all experiments, concatenated horizontally.
struct HankelStack {
  Matrix hu;
  Matrix hy;

  Eigen::Index order() const { return hu.rows(); }
  Eigen::Index columns() const { return hu.cols(); }
};

inline HankelStack build_hankel_stack(const BehaviorDataset& data, Eigen::Index order) {
  const Eigen::Index horizon = data.horizon();
  if (order < 1 || order > horizon) {
    throw DimensionError("build_hankel_stack: order " + std::to_string(order) + " outside [1, " +
                         std::to_string(horizon) + "]");
  }
  const Eigen::Index windows = horizon - order + 1;
  HankelStack s{Matrix(order, data.experiments() * windows),
                Matrix(order, data.experiments() * windows)};
  for (Eigen::Index k = 0; k < data.experiments(); ++k) {
    s.hu.middleCols(k * windows, windows) = hankel(data.u().col(k), order);
    s.hy.middleCols(k * windows, windows) = hankel(data.y().col(k), order);
  }
  return s;
}

/// (1/Ntilde) theta^T [H_u; H_y][H_u; H_y]^T theta for theta = stacked().
inline double kernel_objective(const HankelStack& stack, const KernelModel& model) {
  const Eigen::Index l = stack.order();
  if (model.order() != l) throw DimensionError("kernel_objective: order mismatch");
  const Vector theta = model.stacked();
  const Vector residual =
      stack.hu.transpose() * theta.head(l) + stack.hy.transpose() * theta.tail(l);
  return residual.squaredNorm() / static_cast<double>(stack.columns());
}

struct KernelFit {
  KernelModel model;
  double objective = 0.0;
};

/// Minimizes kernel_objective subject to m_1 = 1, n_L = 0. Fixing those two
/// entries leaves an ordinary least-squares problem in the 2L - 2 free
/// coefficients: regress -y_{t} on (y_{t-1}, ..., y_{t-L+1}, u_{t-1}, ..., u_{t-L+1}).
/// Rank-deficient regressors give the minimum-norm coefficients.
inline KernelFit identify(const HankelStack& stack, double rank_tol) {
  const Eigen::Index l = stack.order();
  const Eigen::Index cols = stack.columns();
  if (l < 1 || cols < 1) throw DimensionError("identify: empty Hankel stack");
  Vector m = Vector::Zero(l);
  Vector n = Vector::Zero(l);
  m(0) = 1.0;
  if (l > 1) {
    // Row L-k of each Hankel block pairs with coefficient index k.
    Matrix regressors(cols, 2 * (l - 1));
    for (Eigen::Index k = 2; k <= l; ++k) regressors.col(k - 2) = stack.hy.row(l - k).transpose();
    for (Eigen::Index k = 1; k <= l - 1; ++k)
      regressors.col(l - 1 + k - 1) = stack.hu.row(l - k).transpose();
    const Vector target = -stack.hy.row(l - 1).transpose();
    const Vector theta = least_squares_min_norm(regressors, target, rank_tol);
    m.tail(l - 1) = theta.head(l - 1);
    n.head(l - 1) = theta.tail(l - 1);
  }
  KernelModel model(std::move(m), std::move(n));
  const double objective = kernel_objective(stack, model);
  return {std::move(model), objective};
}

inline KernelFit identify(const HankelStack& stack) {
  return identify(stack, default_rank_tol(stack.columns(), 2 * stack.order()));
}

/// Monic characteristic polynomial coefficients (1, c_{n-1}, ..., c_0) of A,
/// highest power first, by the Faddeev-LeVerrier recursion.
inline Vector characteristic_polynomial(const Matrix& a) {
  const Eigen::Index n = a.rows();
  Vector coeff(n + 1);
  coeff(0) = 1.0;
  Matrix m = Matrix::Zero(n, n);
  const Matrix eye = Matrix::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = a * m + coeff(k - 1) * eye;
    coeff(k) = -(a * m).trace() / static_cast<double>(k);
  }
  return coeff;
}

/// Exact kernel of a known system for L >= n + 1: m from the characteristic
/// polynomial of A (zero-padded) and n_k = -(column L-k+1 of G_L)^T m_stacked.
inline KernelModel true_kernel(const LtiSystem& sys, Eigen::Index order) {
  const Eigen::Index n_state = sys.order();
  if (order < n_state + 1) {
    throw OrderError("true_kernel: order " + std::to_string(order) + " must be >= n + 1 = " +
                     std::to_string(n_state + 1));
  }
  Vector m = Vector::Zero(order);
  m.head(n_state + 1) = characteristic_polynomial(sys.a());
  m(0) = 1.0;
  const Matrix g_l = toeplitz_G(sys, order);
  const Vector m_stacked = m.reverse();
  Vector n(order);
  for (Eigen::Index k = 1; k < order; ++k) n(k - 1) = -g_l.col(order - k).dot(m_stacked);
  n(order - 1) = 0.0;
  return {std::move(m), std::move(n)};
}

/// -M^{-1} N with M, N the T x T lower Toeplitz matrices of the padded m, n.
inline Matrix assemble_G(const KernelModel& model, Eigen::Index horizon) {
  const Eigen::Index l = model.order();
  if (horizon < l) {
    throw DimensionError("assemble_G: horizon " + std::to_string(horizon) + " < order " +
                         std::to_string(l));
  }
  Vector m_col = Vector::Zero(horizon);
  Vector n_col = Vector::Zero(horizon);
  m_col.head(l) = model.m();
  n_col.head(l) = model.n();
  const Matrix m_mat = lower_toeplitz(m_col);
  Matrix g = -lower_toeplitz(n_col);
  m_mat.triangularView<Eigen::UnitLower>().solveInPlace(g);
  return g;
}

inline Vector indirect_design(const ControlTask& task, const BehaviorDataset& data,
                              Eigen::Index order, double rank_tol) {
  detail::check_length(task, data.horizon(), "indirect_design");
  const KernelFit fit = identify(build_hankel_stack(data, order), rank_tol);
  return certainty_equivalent_input(task, assemble_G(fit.model, task.horizon()));
}

inline Vector indirect_design(const ControlTask& task, const BehaviorDataset& data,
                              Eigen::Index order) {
  const HankelStack stack = build_hankel_stack(data, order);
  return indirect_design(task, data, order, default_rank_tol(stack.columns(), 2 * order));
}

}  // namespace ddpc
