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

// Dense matrix helpers shared by every module: Hankel and Toeplitz
// constructions plus SVD-backed pseudoinverse and least squares.

#include <algorithm>
#include <string>

#include <Eigen/Dense>

#include "ddpc/errors.hpp"

namespace ddpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thin singular value decomposition A = left * diag(values) * right^T.
/// Singular values are non-increasing and non-negative.
struct SvdFactors {
  Matrix left;
  Vector singular_values;
  Matrix right;
};

/// Numerical-rank tolerance, relative to the largest singular value.
inline double default_rank_tol(Eigen::Index rows, Eigen::Index cols) {
  return 1e-10 * static_cast<double>(std::max<Eigen::Index>({rows, cols, 1}));
}

inline void ensure_finite(const Matrix& a, const std::string& what) {
  if (!a.allFinite()) throw InvalidArgument(what + " contains non-finite entries");
}

inline SvdFactors svd(const Matrix& a) {
  if (a.size() == 0) {
    return {Matrix(a.rows(), 0), Vector(0), Matrix(a.cols(), 0)};
  }
  Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

/// Number of singular values strictly above rank_tol * sigma_max.
inline Eigen::Index numerical_rank(const Vector& singular_values, double rank_tol) {
  if (singular_values.size() == 0) return 0;
  const double cutoff = rank_tol * singular_values(0);
  Eigen::Index r = 0;
  while (r < singular_values.size() && singular_values(r) > cutoff) ++r;
  return r;
}

/// Hankel matrix of depth `depth`: column t holds z[t .. t+depth-1].
inline Matrix hankel(const Eigen::Ref<const Vector>& z, Eigen::Index depth) {
  const Eigen::Index len = z.size();
  if (depth < 1 || depth > len) {
    throw DimensionError("hankel: depth " + std::to_string(depth) +
                         " outside [1, " + std::to_string(len) + "]");
  }
  const Eigen::Index cols = len - depth + 1;
  Matrix h(depth, cols);
  for (Eigen::Index j = 0; j < cols; ++j) h.col(j) = z.segment(j, depth);
  return h;
}

/// Square lower-triangular Toeplitz matrix with the given first column.
inline Matrix lower_toeplitz(const Eigen::Ref<const Vector>& first_col) {
  const Eigen::Index t = first_col.size();
  Matrix m = Matrix::Zero(t, t);
  for (Eigen::Index j = 0; j < t; ++j) m.col(j).tail(t - j) = first_col.head(t - j);
  return m;
}

/// Moore-Penrose pseudoinverse; singular values <= rank_tol * sigma_max are
/// dropped.
inline Matrix pinv(const Matrix& a, double rank_tol) {
  if (rank_tol < 0) throw InvalidArgument("pinv: rank_tol must be non-negative");
  const SvdFactors f = svd(a);
  const Eigen::Index r = numerical_rank(f.singular_values, rank_tol);
  if (r == 0) return Matrix::Zero(a.cols(), a.rows());
  const Vector inv = f.singular_values.head(r).cwiseInverse();
  return f.right.leftCols(r) * inv.asDiagonal() * f.left.leftCols(r).transpose();
}

inline Matrix pinv(const Matrix& a) { return pinv(a, default_rank_tol(a.rows(), a.cols())); }

inline double min_singular_value(const Matrix& a) {
  if (a.size() == 0) throw DimensionError("min_singular_value: empty matrix");
  Eigen::JacobiSVD<Matrix> dec(a);
  return dec.singularValues().minCoeff();
}

/// Minimum-norm least-squares solution pinv(A, rank_tol) * b, computed from the
/// SVD without forming the pseudoinverse.
inline Vector least_squares_min_norm(const Matrix& a, const Eigen::Ref<const Vector>& b,
                                     double rank_tol) {
  if (a.rows() != b.size()) {
    throw DimensionError("least_squares_min_norm: A has " + std::to_string(a.rows()) +
                         " rows but b has length " + std::to_string(b.size()));
  }
  if (rank_tol < 0) throw InvalidArgument("least_squares_min_norm: rank_tol must be non-negative");
  const SvdFactors f = svd(a);
  const Eigen::Index r = numerical_rank(f.singular_values, rank_tol);
  if (r == 0) return Vector::Zero(a.cols());
  const Vector coeff =
      (f.left.leftCols(r).transpose() * b).cwiseQuotient(f.singular_values.head(r));
  return f.right.leftCols(r) * coeff;
}

inline Vector least_squares_min_norm(const Matrix& a, const Eigen::Ref<const Vector>& b) {
  return least_squares_min_norm(a, b, default_rank_tol(a.rows(), a.cols()));
}

}  // namespace ddpc
