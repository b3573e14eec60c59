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

// Direct data-driven design: optimize over the span of recorded behaviors
// restricted to Ker(U)^perp, without identifying a model.

#include <cmath>
#include <optional>
#include <string>

#include "ddpc/matops.hpp"
#include "ddpc/task.hpp"

namespace ddpc {

/// Inputs U (T x N) and outputs Y (T x N) from N experiments, one per column.
/// V holds the noise realizations when the data came from the simulator.
class BehaviorDataset {
 public:
  BehaviorDataset(Matrix u, Matrix y, std::optional<Matrix> v = std::nullopt)
      : u_(std::move(u)), y_(std::move(y)), v_(std::move(v)) {
    if (u_.rows() < 1 || u_.cols() < 1) throw DimensionError("BehaviorDataset: empty data");
    if (y_.rows() != u_.rows() || y_.cols() != u_.cols()) {
      throw DimensionError("BehaviorDataset: U and Y must have the same shape");
    }
    if (v_ && (v_->rows() != u_.rows() || v_->cols() != u_.cols())) {
      throw DimensionError("BehaviorDataset: V must match the shape of U");
    }
    ensure_finite(u_, "U");
    ensure_finite(y_, "Y");
    if (v_) ensure_finite(*v_, "V");
  }

  Eigen::Index horizon() const { return u_.rows(); }
  Eigen::Index experiments() const { return u_.cols(); }
  const Matrix& u() const { return u_; }
  const Matrix& y() const { return y_; }
  bool has_noise() const { return v_.has_value(); }
  const Matrix& v() const {
    if (!v_) throw DiagnosticUnavailable("dataset carries no noise realizations");
    return *v_;
  }

 private:
  Matrix u_;
  Matrix y_;
  std::optional<Matrix> v_;
};

/// Minimizer of F over behaviors [U; Y] U^+ U z. Equivalent to
///
///   u = U (U^T Q U + Y_U^T R Y_U)^+ Y_U^T R y_ref,   Y_U = Y U^+ U,
///
/// evaluated in the r-dimensional column space of U: with U = W S Z^T (rank r)
/// and G_d = Y U^+, u = W (W^T (Q + G_d^T R G_d) W)^+ W^T G_d^T R y_ref.
/// Only U's thin SVD is factored, so the cost stays O(T^2 N) for large N.
inline Vector direct_design(const ControlTask& task, const BehaviorDataset& data, double rank_tol) {
  detail::check_length(task, data.horizon(), "direct_design");
  const SvdFactors f = svd(data.u());
  const Eigen::Index r = numerical_rank(f.singular_values, rank_tol);
  if (r == 0) return Vector::Zero(task.horizon());
  const Matrix basis = f.left.leftCols(r);
  const Matrix u_pinv =
      f.right.leftCols(r) * f.singular_values.head(r).cwiseInverse().asDiagonal() * basis.transpose();
  const Matrix g_direct = data.y() * u_pinv;
  const Matrix reduced = basis.transpose() * task_hessian(task, g_direct) * basis;
  const Vector rhs =
      basis.transpose() * (g_direct.transpose() * task.r().cwiseProduct(task.reference()));
  return basis * least_squares_min_norm(reduced, rhs, rank_tol);
}

inline Vector direct_design(const ControlTask& task, const BehaviorDataset& data) {
  return direct_design(task, data, default_rank_tol(data.horizon(), data.experiments()));
}

/// Implicit model G_direct = Y U^+.
inline Matrix implicit_model(const BehaviorDataset& data, double rank_tol) {
  return data.y() * pinv(data.u(), rank_tol);
}

/// Delta_direct = V U^+, the deviation of the implicit model from the truth.
inline Matrix implicit_model_error(const BehaviorDataset& data, double rank_tol) {
  return data.v() * pinv(data.u(), rank_tol);
}

inline Matrix implicit_model_error(const BehaviorDataset& data) {
  return implicit_model_error(data, default_rank_tol(data.horizon(), data.experiments()));
}

/// U U^T / N
inline Matrix empirical_input_covariance(const Matrix& u) {
  return (u * u.transpose()) / static_cast<double>(u.cols());
}

/// Chebyshev-type tail bound on |Delta_direct|_F:
///   P{|Delta|_F >= eps} <= T^2 / (N eps^2) * sigma_w sigma_u / sigma_min^2.
/// sigma_u is the input variance. Values above 1 are returned as is.
inline double theorem1_bound(Eigen::Index horizon, Eigen::Index experiments, double eps,
                             double sigma_w, double sigma_u, double sigma_min_emp) {
  if (!(eps > 0)) throw InvalidArgument("theorem1_bound: eps must be > 0");
  if (experiments < 1) throw InvalidArgument("theorem1_bound: N must be >= 1");
  if (!(sigma_min_emp > 0)) {
    throw SingularCovariance("theorem1_bound: empirical input covariance is singular");
  }
  const double t = static_cast<double>(horizon);
  return t * t / (static_cast<double>(experiments) * eps * eps) * sigma_w * sigma_u /
         (sigma_min_emp * sigma_min_emp);
}

struct DirectDiagnostics {
  Eigen::Index horizon = 0;
  Eigen::Index experiments = 0;
  double delta_frobenius = 0.0;
  double sigma_min_emp = 0.0;

  double bound(double eps, double sigma_w, double sigma_u) const {
    return theorem1_bound(horizon, experiments, eps, sigma_w, sigma_u, sigma_min_emp);
  }
};

inline DirectDiagnostics direct_diagnostics(const BehaviorDataset& data, double rank_tol) {
  return {data.horizon(), data.experiments(), implicit_model_error(data, rank_tol).norm(),
          min_singular_value(empirical_input_covariance(data.u()))};
}

}  // namespace ddpc
