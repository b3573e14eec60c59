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

// Seeded Monte-Carlo harness: dataset generation, per-trial evaluation of both
// designs, the N / T / SNR sweep families and the empirical check of the
// implicit-model concentration bound.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "ddpc/direct.hpp"
#include "ddpc/indirect.hpp"
#include "ddpc/lti.hpp"
#include "ddpc/task.hpp"

namespace ddpc {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Seeds

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class SeedStream : std::uint64_t { system = 1, trial = 2, theorem1 = 3 };

/// Pure function of (master_seed, stream, point_index, trial_index).
inline constexpr std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                                           std::uint64_t point, std::uint64_t trial) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ point);
  return splitmix64(h ^ trial);
}

// ---------------------------------------------------------------------------
// Configuration

enum class SweepFamily { n, t, snr };

inline const char* family_name(SweepFamily f) {
  switch (f) {
    case SweepFamily::n: return "N";
    case SweepFamily::t: return "T";
    case SweepFamily::snr: return "snr";
  }
  return "?";
}

struct ExperimentConfig {
  int n = 3;
  int T = 5;
  std::vector<int> L_values{2, 3, 4};
  std::vector<int> N_grid{20, 50, 100, 200, 500, 1000, 2000};
  int trials = 50;
  double sigma_u = 1.0;
  /// Process-noise standard deviation; omega_w = omega_scalar^2 I.
  double omega_scalar = std::sqrt(0.75);
  double q_weight = 1.0;
  double r_weight = 1.0;
  double y_ref = 1.0;
  std::uint64_t master_seed = 1;
  std::vector<std::string> methods{"direct", "indirect"};
  std::vector<int> t_grid{4, 5, 6};
  /// sigma_u^2 / omega^2
  std::vector<double> snr_grid{1.0 / 3.0, 4.0 / 3.0, 16.0 / 3.0};
  /// Absolute eps values for the bound check; when empty eps_multipliers is
  /// used, scaled by T sqrt(sigma_w sigma_u / N) at each N.
  std::vector<double> eps_grid{};
  std::vector<double> eps_multipliers{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  bool redraw_system_per_point = false;
  bool normalize_spectral_radius = false;

  bool uses(const std::string& method) const {
    return std::find(methods.begin(), methods.end(), method) != methods.end();
  }

  double omega_variance() const { return omega_scalar * omega_scalar; }

  void validate() const {
    auto positive_ints = [](const std::vector<int>& v, const char* key) {
      if (v.empty()) throw ConfigError(key, "grid must be non-empty");
      for (int x : v)
        if (x < 1) throw ConfigError(key, "values must be >= 1");
    };
    auto positive_reals = [](const std::vector<double>& v, const char* key, bool allow_empty) {
      if (v.empty() && !allow_empty) throw ConfigError(key, "grid must be non-empty");
      for (double x : v)
        if (!(x > 0) || !std::isfinite(x)) throw ConfigError(key, "values must be finite and > 0");
    };
    if (n < 1) throw ConfigError("n", "must be >= 1");
    if (T < 1) throw ConfigError("T", "must be >= 1");
    if (trials < 1) throw ConfigError("trials", "must be >= 1");
    if (!(sigma_u > 0) || !std::isfinite(sigma_u)) throw ConfigError("sigma_u", "must be > 0");
    if (!(omega_scalar >= 0) || !std::isfinite(omega_scalar)) {
      throw ConfigError("omega_scalar", "must be finite and >= 0");
    }
    if (!(q_weight > 0) || !std::isfinite(q_weight)) throw ConfigError("q_weight", "must be > 0");
    if (!(r_weight > 0) || !std::isfinite(r_weight)) throw ConfigError("r_weight", "must be > 0");
    if (!std::isfinite(y_ref)) throw ConfigError("y_ref", "must be finite");
    positive_ints(L_values, "L_values");
    positive_ints(N_grid, "N_grid");
    positive_ints(t_grid, "t_grid");
    positive_reals(snr_grid, "snr_grid", false);
    positive_reals(eps_grid, "eps_grid", true);
    positive_reals(eps_multipliers, "eps_multipliers", !eps_grid.empty());
    if (methods.empty()) throw ConfigError("methods", "must name at least one method");
    for (const auto& m : methods)
      if (m != "direct" && m != "indirect") throw ConfigError("methods", "unknown method '" + m + "'");
  }
};

// ---------------------------------------------------------------------------
// Parallel execution

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware
/// concurrency). The first exception thrown by any call is rethrown.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Data and trials

/// N independent experiments from x_0 = 0 with u_t ~ N(0, sigma_u^2). Each
/// experiment draws its T inputs, then its n x T process noise.
template <class Urbg>
BehaviorDataset generate_dataset(const LtiSystem& sys, Eigen::Index horizon, Eigen::Index experiments,
                                 double sigma_u, Urbg& rng) {
  if (horizon < 1 || experiments < 1) throw DimensionError("generate_dataset: T and N must be >= 1");
  const Matrix g = toeplitz_G(sys, horizon);
  Matrix u(horizon, experiments);
  Matrix y(horizon, experiments);
  Matrix v(horizon, experiments);
  for (Eigen::Index k = 0; k < experiments; ++k) {
    u.col(k) = sigma_u * standard_normal(horizon, 1, rng);
    const Matrix w = draw_process_noise(sys, horizon, rng);
    Trajectory traj = propagate(sys, u.col(k), w, g);
    y.col(k) = traj.y;
    v.col(k) = traj.v;
  }
  return {std::move(u), std::move(y), std::move(v)};
}

/// Everything a trial needs besides its seed.
struct TrialPoint {
  LtiSystem system;
  GapEvaluator evaluator;
  Eigen::Index experiments;
  double sigma_u;
  std::vector<int> orders;
  bool run_direct = true;
  bool run_indirect = true;

  TrialPoint(LtiSystem sys, const ControlTask& task, Eigen::Index n_experiments, double input_std,
             std::vector<int> l_values, bool direct = true, bool indirect = true)
      : system(std::move(sys)), evaluator(task, toeplitz_G(system, task.horizon())),
        experiments(n_experiments), sigma_u(input_std), orders(std::move(l_values)),
        run_direct(direct), run_indirect(indirect) {}

  const ControlTask& task() const { return evaluator.task(); }
  Eigen::Index horizon() const { return evaluator.task().horizon(); }
};

struct TrialRecord {
  double direct_gap = std::numeric_limits<double>::quiet_NaN();
  /// One entry per order in TrialPoint::orders.
  std::vector<double> indirect_gaps;
  DirectDiagnostics diagnostics;
};

inline TrialRecord run_trial(const TrialPoint& point, std::uint64_t trial_seed) {
  Rng rng(trial_seed);
  const BehaviorDataset data =
      generate_dataset(point.system, point.horizon(), point.experiments, point.sigma_u, rng);
  const double tol = default_rank_tol(data.horizon(), data.experiments());
  TrialRecord rec;
  rec.diagnostics = direct_diagnostics(data, tol);
  if (point.run_direct) {
    rec.direct_gap = point.evaluator.evaluate(direct_design(point.task(), data, tol)).gap;
  }
  if (point.run_indirect) {
    rec.indirect_gaps.reserve(point.orders.size());
    for (int order : point.orders) {
      rec.indirect_gaps.push_back(
          point.evaluator.evaluate(indirect_design(point.task(), data, order)).gap);
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Statistics

struct Summary {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Mean with a 95% Student-t interval mean +- t_{0.975,k-1} s / sqrt(k).
inline Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("summarize: no values");
  const std::size_t k = values.size();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(k);
  if (k == 1) return {mean, mean, mean};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double s = std::sqrt(ss / static_cast<double>(k - 1));
  const boost::math::students_t dist(static_cast<double>(k - 1));
  const double half = boost::math::quantile(dist, 0.975) * s / std::sqrt(static_cast<double>(k));
  return {mean, mean - half, mean + half};
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  std::string sweep_name;
  double sweep_value = 0.0;
  std::string method;
  int L = 0;
  int T = 0;
  int N = 0;
  double snr = 0.0;
  double mean_gap = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int trial_count = 0;
  std::uint64_t master_seed = 0;
};

struct SweepResult {
  SweepFamily family = SweepFamily::n;
  std::vector<SweepRow> rows;

  /// First row matching (method, L, N) at the given sweep value, or nullptr.
  const SweepRow* find(const std::string& method, int order, int n_exp, double value) const {
    for (const auto& r : rows)
      if (r.method == method && r.L == order && r.N == n_exp && r.sweep_value == value) return &r;
    return nullptr;
  }
};

namespace detail {

struct OuterPoint {
  double value;
  int horizon;
  double omega_variance;
};

inline std::vector<OuterPoint> outer_points(const ExperimentConfig& cfg, SweepFamily family) {
  std::vector<OuterPoint> pts;
  switch (family) {
    case SweepFamily::n:
      pts.push_back({0.0, cfg.T, cfg.omega_variance()});
      break;
    case SweepFamily::t:
      for (int t : cfg.t_grid) pts.push_back({static_cast<double>(t), t, cfg.omega_variance()});
      break;
    case SweepFamily::snr:
      for (double snr : cfg.snr_grid) pts.push_back({snr, cfg.T, cfg.sigma_u * cfg.sigma_u / snr});
      break;
  }
  return pts;
}

inline LtiSystem sweep_system(const ExperimentConfig& cfg, std::uint64_t point) {
  Rng rng(derive_seed(cfg.master_seed, SeedStream::system, point, 0));
  return random_system(cfg.n, rng, {1000, cfg.normalize_spectral_radius});
}

inline double snr_of(double sigma_u, double omega_variance) {
  return omega_variance > 0 ? sigma_u * sigma_u / omega_variance
                            : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Runs `trials` seeded trials at every grid point of the family. One random
/// system (from master_seed) is shared by all points unless
/// redraw_system_per_point is set. Results are reduced in index order, so the
/// output does not depend on `threads`.
inline SweepResult sweep(const ExperimentConfig& cfg, SweepFamily family, unsigned threads = 0) {
  cfg.validate();
  const auto outer = detail::outer_points(cfg, family);
  for (const auto& op : outer)
    for (int order : cfg.L_values)
      if (order > op.horizon) {
        throw ConfigError("L_values", "order " + std::to_string(order) + " exceeds horizon " +
                                          std::to_string(op.horizon));
      }

  const bool direct = cfg.uses("direct");
  const bool indirect = cfg.uses("indirect");
  const LtiSystem shared = detail::sweep_system(cfg, 0);

  std::vector<TrialPoint> points;
  for (std::size_t oi = 0; oi < outer.size(); ++oi) {
    const auto& op = outer[oi];
    const LtiSystem base = cfg.redraw_system_per_point ? detail::sweep_system(cfg, oi) : shared;
    const LtiSystem sys = base.with_isotropic_noise(op.omega_variance);
    const auto task = ControlTask::uniform(op.horizon, cfg.q_weight, cfg.r_weight, cfg.y_ref);
    for (int n_exp : cfg.N_grid) points.emplace_back(sys, task, n_exp, cfg.sigma_u, cfg.L_values, direct, indirect);
  }

  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  std::vector<TrialRecord> records(points.size() * trials);
  parallel_for(records.size(), threads, [&](std::size_t idx) {
    const std::size_t p = idx / trials;
    const std::size_t k = idx % trials;
    records[idx] = run_trial(points[p], derive_seed(cfg.master_seed, SeedStream::trial, p, k));
  });

  SweepResult result{family, {}};
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& op = outer[p / cfg.N_grid.size()];
    const int n_exp = static_cast<int>(points[p].experiments);
    const double value = family == SweepFamily::n ? static_cast<double>(n_exp) : op.value;
    auto row = [&](const char* method, int order, const std::vector<double>& gaps) {
      for (double g : gaps)
        if (!std::isfinite(g)) {
          throw ConsistencyError(std::string("sweep: non-finite gap for ") + method + " at N=" +
                                 std::to_string(n_exp));
        }
      const Summary s = summarize(gaps);
      result.rows.push_back({family_name(family), value, method, order, op.horizon, n_exp,
                             detail::snr_of(cfg.sigma_u, op.omega_variance), s.mean, s.ci_low,
                             s.ci_high, static_cast<int>(gaps.size()), cfg.master_seed});
    };
    std::vector<double> direct_gaps;
    if (direct) {
      for (std::size_t k = 0; k < trials; ++k) direct_gaps.push_back(records[p * trials + k].direct_gap);
    }
    for (std::size_t li = 0; li < cfg.L_values.size(); ++li) {
      // Direct rows are repeated per order so each L group holds both methods.
      if (direct) row("direct", cfg.L_values[li], direct_gaps);
      if (indirect) {
        std::vector<double> gaps;
        for (std::size_t k = 0; k < trials; ++k) gaps.push_back(records[p * trials + k].indirect_gaps[li]);
        row("indirect", cfg.L_values[li], gaps);
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Concentration of the implicit model error

struct Theorem1Row {
  int N = 0;
  double eps = 0.0;
  double empirical_freq = 0.0;
  double bound = 0.0;
  int excluded_trials = 0;
  int trial_count = 0;
  std::uint64_t master_seed = 0;
};

struct Theorem1Point {
  int N = 0;
  int trial_count = 0;  ///< trials used (excluded ones removed)
  int excluded_trials = 0;
  double sigma_w = 0.0;
  double sigma_u = 0.0;  ///< input variance
  double min_sigma_min = 0.0;
  double mean_frobenius = 0.0;
  Matrix mean_delta;
  Matrix se_delta;  ///< standard error of each entry of mean_delta
  std::vector<double> frobenius;  ///< per-trial |Delta|_F, excluded trials removed
  std::vector<double> sigma_min;  ///< per-trial sigma_min(U U^T / N)
};

struct Theorem1Report {
  std::vector<Theorem1Row> rows;
  std::vector<Theorem1Point> points;
};

/// For each N in the grid: `trials` datasets from one system, the exceedance
/// frequency of |Delta_direct|_F >= eps against the bound evaluated with the
/// smallest sigma_min(U U^T / N) over the trials, and entrywise statistics of
/// Delta_direct. Trials whose empirical covariance is numerically singular are
/// excluded and counted.
inline Theorem1Report verify_theorem1(const ExperimentConfig& cfg, unsigned threads = 0) {
  cfg.validate();
  if (cfg.trials < 100) throw ConfigError("trials", "theorem1 needs at least 100 trials");
  const LtiSystem sys = detail::sweep_system(cfg, 0).with_isotropic_noise(cfg.omega_variance());
  const Eigen::Index horizon = cfg.T;
  const double sigma_w = noise_output_variance(sys, horizon);
  const double sigma_u = cfg.sigma_u * cfg.sigma_u;
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);

  Theorem1Report report;
  for (std::size_t ni = 0; ni < cfg.N_grid.size(); ++ni) {
    const int n_exp = cfg.N_grid[ni];
    struct Sample {
      Matrix delta;
      double sigma_min = 0.0;
      bool singular = false;
    };
    std::vector<Sample> samples(trials);
    parallel_for(trials, threads, [&](std::size_t k) {
      Rng rng(derive_seed(cfg.master_seed, SeedStream::theorem1, ni, k));
      const BehaviorDataset data = generate_dataset(sys, horizon, n_exp, cfg.sigma_u, rng);
      const Matrix cov = empirical_input_covariance(data.u());
      Eigen::JacobiSVD<Matrix> dec(cov);
      const Vector& sv = dec.singularValues();
      Sample s;
      s.sigma_min = sv.minCoeff();
      s.singular = !(s.sigma_min > default_rank_tol(horizon, horizon) * sv(0));
      if (!s.singular) s.delta = implicit_model_error(data);
      samples[k] = std::move(s);
    });

    Theorem1Point pt;
    pt.N = n_exp;
    pt.sigma_w = sigma_w;
    pt.sigma_u = sigma_u;
    pt.mean_delta = Matrix::Zero(horizon, horizon);
    Matrix second = Matrix::Zero(horizon, horizon);
    pt.min_sigma_min = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
      if (s.singular) {
        ++pt.excluded_trials;
        continue;
      }
      pt.mean_delta += s.delta;
      second += s.delta.cwiseAbs2();
      pt.frobenius.push_back(s.delta.norm());
      pt.sigma_min.push_back(s.sigma_min);
      pt.min_sigma_min = std::min(pt.min_sigma_min, s.sigma_min);
    }
    pt.trial_count = static_cast<int>(pt.frobenius.size());
    if (pt.trial_count == 0) {
      throw SingularCovariance("verify_theorem1: every trial at N=" + std::to_string(n_exp) +
                               " has a singular input covariance");
    }
    const double k = pt.trial_count;
    pt.mean_delta /= k;
    if (pt.trial_count > 1) {
      const Matrix var = ((second / k - pt.mean_delta.cwiseAbs2()) * (k / (k - 1))).cwiseMax(0.0);
      pt.se_delta = (var / k).cwiseSqrt();
    } else {
      pt.se_delta = Matrix::Zero(horizon, horizon);
    }
    for (double f : pt.frobenius) pt.mean_frobenius += f / k;

    std::vector<double> eps = cfg.eps_grid;
    if (eps.empty()) {
      // With zero noise the relative scale vanishes; the multipliers are then
      // used as absolute values.
      const double scale = static_cast<double>(horizon) * std::sqrt(sigma_w * sigma_u / n_exp);
      for (double mult : cfg.eps_multipliers) eps.push_back(scale > 0 ? mult * scale : mult);
    }
    for (double e : eps) {
      const auto hits = std::count_if(pt.frobenius.begin(), pt.frobenius.end(),
                                      [e](double f) { return f >= e; });
      report.rows.push_back({n_exp, e, static_cast<double>(hits) / k,
                             theorem1_bound(horizon, n_exp, e, sigma_w, sigma_u, pt.min_sigma_min),
                             pt.excluded_trials, pt.trial_count, cfg.master_seed});
    }
    report.points.push_back(std::move(pt));
  }
  return report;
}

}  // namespace ddpc
