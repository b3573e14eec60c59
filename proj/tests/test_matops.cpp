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

#include <random>

#include <gtest/gtest.h>

#include "ddpc/matops.hpp"

using namespace ddpc;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

double rel(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

// Random matrix of the given shape and rank (rank <= min(rows, cols)).
Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, int rank) {
  std::normal_distribution<double> d;
  Matrix l(rows, rank), r(rank, cols);
  for (auto& x : l.reshaped()) x = d(rng);
  for (auto& x : r.reshaped()) x = d(rng);
  return l * r;
}

}  // namespace

TEST(Hankel, SlidingWindows) {
  EXPECT_EQ(hankel(vec({1, 2, 3, 4}), 2), mat({{1, 2, 3}, {2, 3, 4}}));
  EXPECT_EQ(hankel(vec({5}), 1), mat({{5}}));
  EXPECT_EQ(hankel(vec({1, 2, 3, 4, 5}), 3), mat({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}}));
}

TEST(Hankel, DepthOutOfRange) {
  EXPECT_THROW(hankel(vec({1, 2, 3}), 0), DimensionError);
  EXPECT_THROW(hankel(vec({1, 2, 3}), 4), DimensionError);
}

TEST(Hankel, AntiDiagonalsRecoverSignal) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d;
  for (int len = 1; len <= 12; ++len) {
    Vector z(len);
    for (auto& x : z) x = d(rng);
    for (int depth = 1; depth <= len; ++depth) {
      const Matrix h = hankel(z, depth);
      for (int i = 0; i < h.rows(); ++i)
        for (int j = 0; j < h.cols(); ++j) ASSERT_EQ(h(i, j), z(i + j));
    }
  }
}

TEST(LowerToeplitz, Examples) {
  EXPECT_EQ(lower_toeplitz(vec({1, 0.5, 0.25})), mat({{1, 0, 0}, {0.5, 1, 0}, {0.25, 0.5, 1}}));
  EXPECT_EQ(lower_toeplitz(vec({1, 0, 0})), Matrix::Identity(3, 3));
  EXPECT_EQ(lower_toeplitz(vec({0, 0})), Matrix::Zero(2, 2));
}

TEST(LowerToeplitz, FirstUnitVectorIsIdentity) {
  for (int t = 1; t <= 10; ++t) EXPECT_EQ(lower_toeplitz(Vector::Unit(t, 0)), Matrix::Identity(t, t));
}

TEST(Pinv, Examples) {
  EXPECT_LT(rel(pinv(mat({{1, 0}, {0, 0}})), mat({{1, 0}, {0, 0}})), 1e-15);
  EXPECT_NEAR(pinv(mat({{2}}))(0, 0), 0.5, 1e-15);
  const Matrix a = mat({{1}, {1}});
  const Matrix p = pinv(a);
  EXPECT_LT(rel(p, mat({{0.5, 0.5}})), 1e-15);
  // Penrose identities by direct multiplication.
  EXPECT_LT(rel(a * p * a, a), 1e-15);
  EXPECT_LT(rel(p * a * p, p), 1e-15);
  EXPECT_LT(rel((a * p).transpose(), a * p), 1e-15);
  EXPECT_LT(rel((p * a).transpose(), p * a), 1e-15);
}

TEST(Pinv, ZeroMatrix) {
  EXPECT_EQ(pinv(Matrix::Zero(3, 2)), Matrix::Zero(2, 3));
  EXPECT_THROW(pinv(Matrix::Identity(2, 2), -1.0), InvalidArgument);
}

TEST(Pinv, PenroseIdentitiesOnRandomMatrices) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 20);
  for (int c = 0; c < 200; ++c) {
    const int rows = dim(rng), cols = dim(rng);
    const int rank = std::uniform_int_distribution<int>(1, std::min(rows, cols))(rng);
    const Matrix a = random_matrix(rng, rows, cols, rank);
    const Matrix p = pinv(a);
    ASSERT_LT(rel(a * p * a, a), 1e-8) << rows << "x" << cols << " rank " << rank;
    ASSERT_LT(rel(p * a * p, p), 1e-8);
    ASSERT_LT(rel((a * p).transpose(), a * p), 1e-8);
    ASSERT_LT(rel((p * a).transpose(), p * a), 1e-8);
  }
}

TEST(Svd, ReconstructionAndOrdering) {
  std::mt19937_64 rng(3);
  for (int c = 0; c < 50; ++c) {
    const int rows = 1 + c % 9, cols = 1 + (c * 7) % 11;
    const Matrix a = random_matrix(rng, rows, cols, std::min(rows, cols));
    const SvdFactors f = svd(a);
    const Matrix back = f.left * f.singular_values.asDiagonal() * f.right.transpose();
    EXPECT_LE((a - back).norm(), 1e-10 * std::max(1.0, a.norm()));
    for (Eigen::Index i = 0; i < f.singular_values.size(); ++i) {
      EXPECT_GE(f.singular_values(i), 0.0);
      if (i > 0) EXPECT_LE(f.singular_values(i), f.singular_values(i - 1));
    }
  }
}

TEST(MinSingularValue, Examples) {
  EXPECT_NEAR(min_singular_value(Matrix::Identity(3, 3)), 1.0, 1e-15);
  EXPECT_NEAR(min_singular_value(Vector(vec({3, 2})).asDiagonal().toDenseMatrix()), 2.0, 1e-15);
  EXPECT_NEAR(min_singular_value(mat({{1, 1}, {1, 1}})), 0.0, 1e-15);
  EXPECT_THROW(min_singular_value(Matrix(0, 0)), DimensionError);
}

TEST(MinSingularValue, MatchesGramEigenvalue) {
  std::mt19937_64 rng(11);
  for (int c = 0; c < 100; ++c) {
    const int cols = 1 + c % 8;
    const int rows = cols + c % 5;
    const Matrix a = random_matrix(rng, rows, cols, cols);
    const double s = min_singular_value(a);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
    const double lambda = eig.eigenvalues().minCoeff();
    EXPECT_NEAR(s * s, lambda, 1e-9 * std::max(lambda, 1e-300) + 1e-12 * eig.eigenvalues().maxCoeff());
  }
}

TEST(LeastSquaresMinNorm, Examples) {
  EXPECT_LT((least_squares_min_norm(Matrix::Identity(2, 2), vec({3, 4})) - vec({3, 4})).norm(), 1e-15);
  EXPECT_LT((least_squares_min_norm(mat({{1, 1}}), vec({2})) - vec({1, 1})).norm(), 1e-14);
  EXPECT_EQ(least_squares_min_norm(Matrix::Zero(2, 2), vec({1, 1})), Vector::Zero(2));
  EXPECT_THROW(least_squares_min_norm(Matrix::Identity(2, 2), vec({1, 2, 3})), DimensionError);
}

TEST(LeastSquaresMinNorm, AgreesWithPinvProduct) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  for (int c = 0; c < 50; ++c) {
    const int rows = 2 + c % 9, cols = 1 + c % 6;
    const Matrix a = random_matrix(rng, rows, cols, 1 + c % std::min(rows, cols));
    Vector b(rows);
    for (auto& x : b) x = d(rng);
    EXPECT_LT((least_squares_min_norm(a, b) - pinv(a) * b).norm(), 1e-9 * std::max(1.0, b.norm()));
  }
}
