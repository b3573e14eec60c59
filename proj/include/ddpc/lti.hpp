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

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "ddpc/matops.hpp"

namespace ddpc {

/// Single-input single-output stochastic LTI system
///
///   x_{t+1} = A x_t + B u_t + w_t,   y_t = C x_t,   w_t ~ N(0, omega_w),
///
/// always started from x_0 = 0. Immutable once built; a square-root factor of
/// the noise covariance is computed up front for sampling.
class LtiSystem {
 public:
  LtiSystem(Matrix a, Matrix b, Matrix c, Matrix omega_w = Matrix())
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), omega_(std::move(omega_w)) {
    const Eigen::Index n = a_.rows();
    if (n < 1 || a_.cols() != n) throw DimensionError("LtiSystem: A must be square and non-empty");
    if (b_.rows() != n || b_.cols() != 1) throw DimensionError("LtiSystem: B must be n x 1");
    if (c_.rows() != 1 || c_.cols() != n) throw DimensionError("LtiSystem: C must be 1 x n");
    if (omega_.size() == 0) omega_ = Matrix::Zero(n, n);
    if (omega_.rows() != n || omega_.cols() != n) {
      throw DimensionError("LtiSystem: omega_w must be n x n");
    }
    ensure_finite(a_, "A");
    ensure_finite(b_, "B");
    ensure_finite(c_, "C");
    ensure_finite(omega_, "omega_w");
    noise_factor_ = psd_factor(omega_);
  }

  Eigen::Index order() const { return a_.rows(); }
  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const Matrix& c() const { return c_; }
  const Matrix& omega_w() const { return omega_; }

  /// F with F F^T = omega_w.
  const Matrix& noise_factor() const { return noise_factor_; }

  LtiSystem with_process_noise(const Matrix& omega_w) const { return {a_, b_, c_, omega_w}; }

  LtiSystem with_isotropic_noise(double variance) const {
    return with_process_noise(variance * Matrix::Identity(order(), order()));
  }

 private:
  static Matrix psd_factor(const Matrix& omega) {
    const double scale = std::max(1.0, omega.cwiseAbs().maxCoeff());
    if ((omega - omega.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw InvalidArgument("omega_w must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (omega + omega.transpose()));
    Vector lambda = eig.eigenvalues();
    if (lambda.minCoeff() < -1e-12) throw InvalidArgument("omega_w must be positive semidefinite");
    lambda = lambda.cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * lambda.asDiagonal();
  }

  Matrix a_;
  Matrix b_;
  Matrix c_;
  Matrix omega_;
  Matrix noise_factor_;
};

/// One experiment over a horizon of length T: u = (u_0..u_{T-1}),
/// y = (y_1..y_T) and the accumulated noise v = y - G u.
struct Trajectory {
  Vector u;
  Vector y;
  Vector v;
};

/// [B, AB, ..., A^{n-1}B]
inline Matrix controllability_matrix(const Matrix& a, const Matrix& b) {
  const Eigen::Index n = a.rows();
  Matrix k(n, n * b.cols());
  Matrix block = b;
  for (Eigen::Index i = 0; i < n; ++i) {
    k.middleCols(i * b.cols(), b.cols()) = block;
    block = a * block;
  }
  return k;
}

/// Row k equals C A^k, k = 0..depth-1.
inline Matrix extended_observability(const LtiSystem& sys, Eigen::Index depth) {
  if (depth < 1) throw DimensionError("extended_observability: depth must be >= 1");
  Matrix o(depth, sys.order());
  Matrix row = sys.c();
  for (Eigen::Index k = 0; k < depth; ++k) {
    o.row(k) = row;
    row = row * sys.a();
  }
  return o;
}

inline constexpr double kRankThreshold = 1e-8;

/// (A, C) observable, (A, B) and (A, AB) controllable, each tested through
/// sigma_min of the n-step matrix.
inline bool satisfies_rank_conditions(const LtiSystem& sys, double threshold = kRankThreshold) {
  const Eigen::Index n = sys.order();
  return min_singular_value(extended_observability(sys, n)) > threshold &&
         min_singular_value(controllability_matrix(sys.a(), sys.b())) > threshold &&
         min_singular_value(controllability_matrix(sys.a(), sys.a() * sys.b())) > threshold;
}

struct RandomSystemOptions {
  int max_attempts = 1000;
  /// Rescale A to spectral radius 0.9 after drawing.
  bool normalize_spectral_radius = false;
};

inline double spectral_radius(const Matrix& a) {
  Eigen::EigenSolver<Matrix> eig(a, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

/// Rejection sampling over candidates produced by `draw`, which returns a
/// tuple (A, B, C). The result carries zero process noise.
template <class Draw>
LtiSystem random_system_from(Eigen::Index n, Draw&& draw, const RandomSystemOptions& opts = {}) {
  if (n < 1) throw InvalidArgument("random_system: order must be >= 1");
  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    auto candidate = draw();
    Matrix a = std::get<0>(candidate);
    Matrix b = std::get<1>(candidate);
    Matrix c = std::get<2>(candidate);
    if (opts.normalize_spectral_radius) {
      const double rho = spectral_radius(a);
      if (rho > 0) a *= 0.9 / rho;
    }
    LtiSystem sys(std::move(a), std::move(b), std::move(c));
    if (satisfies_rank_conditions(sys)) return sys;
  }
  throw GenerationError("random_system: no admissible system after " +
                        std::to_string(opts.max_attempts) + " attempts");
}

template <class Urbg>
Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Urbg& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

/// A, B, C with i.i.d. standard normal entries, resampled until the rank
/// conditions hold.
template <class Urbg>
LtiSystem random_system(Eigen::Index n, Urbg& rng, const RandomSystemOptions& opts = {}) {
  return random_system_from(
      n,
      [&] {
        Matrix a = standard_normal(n, n, rng);
        Matrix b = standard_normal(n, 1, rng);
        Matrix c = standard_normal(1, n, rng);
        return std::make_tuple(std::move(a), std::move(b), std::move(c));
      },
      opts);
}

/// Markov parameters (CB, CAB, ..., CA^{T-1}B).
inline Vector markov_parameters(const LtiSystem& sys, Eigen::Index horizon) {
  return extended_observability(sys, horizon) * sys.b();
}

/// T x T lower-triangular Toeplitz input-output map G.
inline Matrix toeplitz_G(const LtiSystem& sys, Eigen::Index horizon) {
  if (horizon < 1) throw DimensionError("toeplitz_G: horizon must be >= 1");
  return lower_toeplitz(markov_parameters(sys, horizon));
}

/// T x nT noise-to-output map G': block (i, j) = C A^{i-j} for i >= j.
inline Matrix toeplitz_Gprime(const LtiSystem& sys, Eigen::Index horizon) {
  if (horizon < 1) throw DimensionError("toeplitz_Gprime: horizon must be >= 1");
  const Eigen::Index n = sys.order();
  const Matrix obs = extended_observability(sys, horizon);
  Matrix g = Matrix::Zero(horizon, n * horizon);
  for (Eigen::Index i = 0; i < horizon; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) g.block(i, j * n, 1, n) = obs.row(i - j);
  return g;
}

/// sum_{t<T} C A^t omega_w A^{t T} C^T, the variance of the last entry of v.
inline double noise_output_variance(const LtiSystem& sys, Eigen::Index horizon) {
  if (horizon < 1) throw DimensionError("noise_output_variance: horizon must be >= 1");
  const Matrix obs = extended_observability(sys, horizon);
  return (obs * sys.omega_w() * obs.transpose()).trace();
}

/// n x T matrix whose column t is w_t ~ N(0, omega_w).
template <class Urbg>
Matrix draw_process_noise(const LtiSystem& sys, Eigen::Index horizon, Urbg& rng) {
  return sys.noise_factor() * standard_normal(sys.order(), horizon, rng);
}

/// Deterministic propagation from x_0 = 0 with given inputs and noise, using a
/// precomputed G for the v = y - G u bookkeeping.
inline Trajectory propagate(const LtiSystem& sys, const Eigen::Ref<const Vector>& u,
                            const Eigen::Ref<const Matrix>& w, const Matrix& g) {
  const Eigen::Index horizon = u.size();
  if (horizon < 1) throw DimensionError("simulate: horizon must be >= 1");
  if (w.rows() != sys.order() || w.cols() != horizon) {
    throw DimensionError("simulate: noise must be n x T");
  }
  if (g.rows() != horizon || g.cols() != horizon) throw DimensionError("simulate: G must be T x T");
  Trajectory out{u, Vector(horizon), Vector(horizon)};
  Vector x = Vector::Zero(sys.order());
  for (Eigen::Index t = 0; t < horizon; ++t) {
    x = sys.a() * x + sys.b() * u(t) + w.col(t);
    out.y(t) = sys.c().row(0).dot(x);
  }
  out.v = out.y - g * u;
  return out;
}

inline Trajectory propagate(const LtiSystem& sys, const Eigen::Ref<const Vector>& u,
                            const Eigen::Ref<const Matrix>& w) {
  if (u.size() < 1) throw DimensionError("simulate: horizon must be >= 1");
  return propagate(sys, u, w, toeplitz_G(sys, u.size()));
}

template <class Urbg>
Trajectory simulate(const LtiSystem& sys, const Eigen::Ref<const Vector>& u, Urbg& rng) {
  if (u.size() < 1) throw DimensionError("simulate: horizon must be >= 1");
  const Matrix w = draw_process_noise(sys, u.size(), rng);
  return propagate(sys, u, w);
}

}  // namespace ddpc
