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

#include "ddpc/lti.hpp"

using namespace ddpc;

namespace {

LtiSystem scalar(double a, double b, double c, double omega = 0.0) {
  return {Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b), Matrix::Constant(1, 1, c),
          Matrix::Constant(1, 1, omega)};
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST(LtiSystem, RejectsBadShapesAndCovariances) {
  EXPECT_THROW(LtiSystem(Matrix::Identity(2, 2), Matrix::Ones(3, 1), Matrix::Ones(1, 2)), DimensionError);
  EXPECT_THROW(LtiSystem(Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Ones(2, 2)), DimensionError);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW(LtiSystem(Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Ones(1, 2), asym),
               InvalidArgument);
  Matrix indefinite(2, 2);
  indefinite << 1, 0, 0, -0.1;
  EXPECT_THROW(LtiSystem(Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Ones(1, 2), indefinite),
               InvalidArgument);
  Matrix nan = Matrix::Identity(2, 2);
  nan(0, 0) = std::nan("");
  EXPECT_THROW(LtiSystem(nan, Matrix::Ones(2, 1), Matrix::Ones(1, 2)), InvalidArgument);
}

TEST(LtiSystem, SingularCovarianceFactor) {
  Matrix omega(2, 2);
  omega << 1, 1, 1, 1;  // rank one
  const LtiSystem sys(Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Ones(1, 2), omega);
  EXPECT_LT((sys.noise_factor() * sys.noise_factor().transpose() - omega).norm(), 1e-12);
}

TEST(RandomSystem, SatisfiesRankConditions) {
  std::mt19937_64 rng(42);
  const LtiSystem sys = random_system(3, rng);
  EXPECT_EQ(sys.order(), 3);
  EXPECT_TRUE(satisfies_rank_conditions(sys));
  EXPECT_EQ(sys.omega_w(), Matrix::Zero(3, 3));
}

TEST(RandomSystem, ScalarForcedDraw) {
  const LtiSystem sys = random_system_from(1, [] {
    return std::make_tuple(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0),
                           Matrix::Constant(1, 1, 1.0));
  });
  EXPECT_EQ(sys.a()(0, 0), 0.5);
}

TEST(RandomSystem, ResamplesUncontrollableDraw) {
  std::mt19937_64 rng(1);
  int calls = 0;
  const LtiSystem sys = random_system_from(2, [&] {
    ++calls;
    Matrix a = standard_normal(2, 2, rng);
    Matrix b = calls == 1 ? Matrix::Zero(2, 1) : standard_normal(2, 1, rng);
    Matrix c = standard_normal(1, 2, rng);
    return std::make_tuple(a, b, c);
  });
  EXPECT_EQ(calls, 2);
  EXPECT_NE(sys.b().norm(), 0.0);
}

TEST(RandomSystem, GivesUpAfterMaxAttempts) {
  EXPECT_THROW(random_system_from(
                   2,
                   [] {
                     return std::make_tuple(Matrix::Identity(2, 2), Matrix::Zero(2, 1), Matrix::Ones(1, 2));
                   },
                   {5, false}),
               GenerationError);
}

TEST(RandomSystem, OptionalSpectralNormalization) {
  std::mt19937_64 rng(9);
  const LtiSystem sys = random_system(3, rng, {1000, true});
  EXPECT_NEAR(spectral_radius(sys.a()), 0.9, 1e-10);
}

TEST(Simulate, ScalarHandIteration) {
  std::mt19937_64 rng(0);
  const Trajectory tr = simulate(scalar(0.5, 1, 1), vec({1, 0}), rng);
  EXPECT_NEAR(tr.y(0), 1.0, 1e-15);
  EXPECT_NEAR(tr.y(1), 0.5, 1e-15);
  EXPECT_EQ(tr.v, Vector::Zero(2));
}

TEST(Simulate, ZeroInputZeroNoise) {
  std::mt19937_64 rng(1);
  const LtiSystem sys = random_system(3, rng);
  const Trajectory tr = simulate(sys, Vector::Zero(6), rng);
  EXPECT_EQ(tr.y, Vector::Zero(6));
}

TEST(Simulate, NoiseMatchesRecordedDraws) {
  const LtiSystem sys = scalar(0.5, 1, 1, 1.0);
  const Vector u = vec({0.3, -1.2, 0.7, 2.0});
  std::mt19937_64 a(99), b(99);
  const Trajectory tr = simulate(sys, u, a);
  const Matrix w = draw_process_noise(sys, 4, b);
  EXPECT_LT((tr.v - toeplitz_Gprime(sys, 4) * w.reshaped()).norm(), 1e-12);
}

TEST(Simulate, ConsistencyOnRandomTriples) {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> order(1, 4), len(1, 8);
  for (int c = 0; c < 100; ++c) {
    const int n = order(rng), t = len(rng);
    const LtiSystem sys = random_system(n, rng).with_isotropic_noise(0.5);
    const Vector u = standard_normal(t, 1, rng);
    const Matrix w = draw_process_noise(sys, t, rng);
    const Trajectory tr = propagate(sys, u, w);
    const Vector expected = toeplitz_G(sys, t) * u + toeplitz_Gprime(sys, t) * w.reshaped();
    ASSERT_LE((tr.y - expected).norm(), 1e-10 * std::max(1.0, tr.y.norm()));
    ASSERT_LE((tr.y - (toeplitz_G(sys, t) * u + tr.v)).norm(), 1e-10 * std::max(1.0, tr.y.norm()));
  }
}

TEST(Simulate, NoiseFreeSystemHasZeroV) {
  std::mt19937_64 rng(8);
  const LtiSystem sys = random_system(3, rng);
  for (int k = 0; k < 20; ++k) {
    const Trajectory tr = simulate(sys, standard_normal(5, 1, rng), rng);
    EXPECT_LE(tr.v.norm(), 1e-12 * std::max(1.0, tr.y.norm()));
  }
}

TEST(ToeplitzG, Examples) {
  const Matrix g = toeplitz_G(scalar(0.5, 1, 1), 3);
  EXPECT_EQ(Vector(g.col(0)), vec({1, 0.5, 0.25}));
  EXPECT_EQ(toeplitz_G(LtiSystem(Matrix::Identity(2, 2), Matrix::Zero(2, 1), Matrix::Ones(1, 2)), 4),
            Matrix::Zero(4, 4));
  EXPECT_EQ(toeplitz_G(scalar(0.5, 2, 3), 1), Matrix::Constant(1, 1, 6.0));
  EXPECT_THROW(toeplitz_G(scalar(0.5, 1, 1), 0), DimensionError);
}

TEST(ToeplitzG, LeadingBlockIsShorterHorizon) {
  std::mt19937_64 rng(17);
  for (int c = 0; c < 20; ++c) {
    const LtiSystem sys = random_system(1 + c % 4, rng);
    const Matrix g = toeplitz_G(sys, 8);
    for (int l = 1; l <= 8; ++l) EXPECT_EQ(Matrix(g.topLeftCorner(l, l)), toeplitz_G(sys, l));
  }
}

TEST(ToeplitzGprime, Examples) {
  Matrix expected(2, 2);
  expected << 1, 0, 0.5, 1;
  EXPECT_EQ(toeplitz_Gprime(scalar(0.5, 1, 1), 2), expected);
  EXPECT_EQ(toeplitz_Gprime(LtiSystem(Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Zero(1, 2)), 3),
            Matrix::Zero(3, 6));
  Matrix c(1, 2);
  c << 2, -1;
  EXPECT_EQ(toeplitz_Gprime(LtiSystem(Matrix::Identity(2, 2), Matrix::Ones(2, 1), c), 1), c);
}

TEST(ExtendedObservability, Examples) {
  EXPECT_EQ(Vector(extended_observability(scalar(0.5, 1, 1), 3)), vec({1, 0.5, 0.25}));
  Matrix c(1, 2);
  c << 2, -1;
  Matrix a(2, 2);
  a << 0, 1, -1, 0;
  EXPECT_EQ(extended_observability(LtiSystem(a, Matrix::Ones(2, 1), c), 1), c);
  EXPECT_EQ(extended_observability(LtiSystem(a, Matrix::Ones(2, 1), Matrix::Zero(1, 2)), 3),
            Matrix::Zero(3, 2));
}

TEST(NoiseOutputVariance, Examples) {
  EXPECT_NEAR(noise_output_variance(scalar(0.5, 1, 1, 1.0), 2), 1.25, 1e-15);
  EXPECT_EQ(noise_output_variance(scalar(0.5, 1, 1, 0.0), 5), 0.0);
  std::mt19937_64 rng(4);
  const LtiSystem sys = random_system(3, rng).with_isotropic_noise(0.75);
  EXPECT_NEAR(noise_output_variance(sys, 1), (sys.c() * sys.omega_w() * sys.c().transpose())(0, 0), 1e-12);
}

TEST(NoiseOutputVariance, MonotoneInHorizon) {
  std::mt19937_64 rng(5);
  for (int c = 0; c < 20; ++c) {
    const LtiSystem sys = random_system(1 + c % 4, rng).with_isotropic_noise(0.3);
    double prev = 0.0;
    for (int t = 1; t <= 10; ++t) {
      const double s = noise_output_variance(sys, t);
      EXPECT_GE(s, prev);
      prev = s;
    }
  }
}

TEST(NoiseOutputVariance, MatchesEmpiricalVarianceOfLastOutput) {
  const LtiSystem sys = scalar(0.5, 1, 1, 1.0);
  std::mt19937_64 rng(77);
  const int draws = 40000;
  double sum = 0.0, sum_sq = 0.0;
  for (int k = 0; k < draws; ++k) {
    const double v = simulate(sys, Vector::Zero(3), rng).v(2);
    sum += v;
    sum_sq += v * v;
  }
  const double var = sum_sq / draws - (sum / draws) * (sum / draws);
  // 1 + 0.25 + 0.0625; relative sd of a sample variance is sqrt(2 / draws).
  EXPECT_NEAR(var, noise_output_variance(sys, 3), 4 * std::sqrt(2.0 / draws) * 1.3125);
}
