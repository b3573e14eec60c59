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

// Config files, CSV output and subcommand dispatch behind the ddpc tool.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddpc/experiments.hpp"

namespace ddpc {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Config

namespace detail {

template <class T>
T read_key(const Json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(key, std::string("wrong type: ") + e.what());
  }
}

inline std::uint64_t read_seed(const Json& j) {
  if (!j.is_number_integer()) throw ConfigError("master_seed", "must be a non-negative integer");
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const auto v = j.get<std::int64_t>();
  if (v < 0) throw ConfigError("master_seed", "must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

inline int read_int(const Json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(key, "must be an integer");
  return read_key<int>(j, key);
}

inline std::vector<int> read_int_list(const Json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key, "must be a list of integers");
  std::vector<int> out;
  for (const auto& x : j) out.push_back(read_int(x, key));
  return out;
}

inline double read_real(const Json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, "must be a number");
  return j.get<double>();
}

inline std::vector<double> read_real_list(const Json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key, "must be a list of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(read_real(x, key));
  return out;
}

}  // namespace detail

/// Keys accepted in config files and `--set` overrides.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "n",          "T",          "L_values",      "N_grid",   "trials",
      "sigma_u",    "omega_scalar", "q_weight",    "r_weight", "y_ref",
      "master_seed", "methods",   "t_grid",        "snr_grid", "eps_grid",
      "eps_multipliers", "redraw_system_per_point", "normalize_spectral_radius"};
  return keys;
}

/// Flat JSON object to a validated config. Missing keys keep their defaults;
/// unknown keys are rejected.
inline ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  const auto& keys = config_keys();
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(key, "unknown config key");
    }
    using namespace detail;
    if (key == "n") cfg.n = read_int(value, key);
    else if (key == "T") cfg.T = read_int(value, key);
    else if (key == "L_values") cfg.L_values = read_int_list(value, key);
    else if (key == "N_grid") cfg.N_grid = read_int_list(value, key);
    else if (key == "trials") cfg.trials = read_int(value, key);
    else if (key == "sigma_u") cfg.sigma_u = read_real(value, key);
    else if (key == "omega_scalar") cfg.omega_scalar = read_real(value, key);
    else if (key == "q_weight") cfg.q_weight = read_real(value, key);
    else if (key == "r_weight") cfg.r_weight = read_real(value, key);
    else if (key == "y_ref") cfg.y_ref = read_real(value, key);
    else if (key == "master_seed") cfg.master_seed = read_seed(value);
    else if (key == "methods") cfg.methods = read_key<std::vector<std::string>>(value, key);
    else if (key == "t_grid") cfg.t_grid = read_int_list(value, key);
    else if (key == "snr_grid") cfg.snr_grid = read_real_list(value, key);
    else if (key == "eps_grid") cfg.eps_grid = read_real_list(value, key);
    else if (key == "eps_multipliers") cfg.eps_multipliers = read_real_list(value, key);
    else if (key == "redraw_system_per_point") cfg.redraw_system_per_point = read_key<bool>(value, key);
    else if (key == "normalize_spectral_radius") cfg.normalize_spectral_radius = read_key<bool>(value, key);
  }
  cfg.validate();
  return cfg;
}

/// Applies `key=value` overrides to a config object. Values are parsed as
/// JSON (so `trials=5` and `N_grid=[20,50]` work); anything that is not valid
/// JSON is taken as a string.
inline void apply_overrides(Json& j, const std::vector<std::string>& overrides) {
  const auto& keys = config_keys();
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(ov, "override must have the form key=value");
    }
    const std::string key = ov.substr(0, eq);
    const std::string raw = ov.substr(eq + 1);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(key, "unknown config key in override");
    }
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    j[key] = std::move(value);
  }
}

inline ExperimentConfig parse_config(const std::filesystem::path& path,
                                     const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config", "'" + path.string() + "' is not valid JSON");
  apply_overrides(j, overrides);
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kSweepHeader =
    "sweep_name,sweep_value,method,L,T,N,snr,mean_gap,ci_low,ci_high,trial_count,master_seed";
inline constexpr const char* kTheorem1Header =
    "N,eps,empirical_freq,bound,excluded_trials,trial_count,master_seed";

/// Shortest round-trip decimal representation (17 significant digits max).
inline std::string format_real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[32];
  for (int digits = 12; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline std::string to_csv(const SweepResult& result) {
  std::ostringstream os;
  os << kSweepHeader << '\n';
  for (const auto& r : result.rows) {
    os << r.sweep_name << ',' << format_real(r.sweep_value) << ',' << r.method << ',' << r.L << ','
       << r.T << ',' << r.N << ',' << format_real(r.snr) << ',' << format_real(r.mean_gap) << ','
       << format_real(r.ci_low) << ',' << format_real(r.ci_high) << ',' << r.trial_count << ','
       << r.master_seed << '\n';
  }
  return os.str();
}

inline std::string to_csv(const Theorem1Report& report) {
  std::ostringstream os;
  os << kTheorem1Header << '\n';
  for (const auto& r : report.rows) {
    os << r.N << ',' << format_real(r.eps) << ',' << format_real(r.empirical_freq) << ','
       << format_real(r.bound) << ',' << r.excluded_trials << ',' << r.trial_count << ','
       << r.master_seed << '\n';
  }
  return os.str();
}

/// Writes to a sibling temporary file, then renames over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot move results to '" + path.string() + "': " + ec.message());
  }
}

// ---------------------------------------------------------------------------
// Dispatch

struct CliInvocation {
  std::string subcommand;  ///< sweep-n | sweep-t | sweep-snr | theorem1 | demo
  std::string config_path;
  std::string out_path;
  std::vector<std::string> overrides;
  unsigned threads = 0;
};

/// Built-in configuration of the `demo` subcommand.
inline ExperimentConfig demo_config() {
  ExperimentConfig cfg;
  cfg.L_values = {2, 4};
  cfg.N_grid = {20, 100, 500};
  cfg.trials = 20;
  return cfg;
}

/// One line per grid point: the direct gap once, then each indirect order.
inline void print_sweep_summary(const SweepResult& result, std::ostream& log) {
  for (std::size_t i = 0; i < result.rows.size();) {
    const SweepRow& head = result.rows[i];
    if (head.sweep_name != "N") log << head.sweep_name << '=' << format_real(head.sweep_value) << ' ';
    log << "T=" << head.T << " N=" << head.N;
    bool direct_done = false;
    for (; i < result.rows.size() && result.rows[i].sweep_value == head.sweep_value &&
           result.rows[i].N == head.N;
         ++i) {
      const SweepRow& r = result.rows[i];
      if (r.method == "direct") {
        if (!direct_done) log << "  direct=" << format_real(r.mean_gap);
        direct_done = true;
      } else {
        log << "  indirect[L=" << r.L << "]=" << format_real(r.mean_gap);
      }
    }
    log << '\n';
  }
}

inline void print_theorem1_summary(const Theorem1Report& report, std::ostream& log) {
  for (const auto& p : report.points) {
    log << "N=" << p.N << " trials=" << p.trial_count << " excluded=" << p.excluded_trials
        << " mean|Delta|_F=" << format_real(p.mean_frobenius)
        << " min sigma_min=" << format_real(p.min_sigma_min) << '\n';
  }
}

/// Executes one invocation. Returns the process exit status; errors are
/// reported on `err`.
inline int run(const CliInvocation& inv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  try {
    static const std::map<std::string, SweepFamily> families{
        {"sweep-n", SweepFamily::n}, {"sweep-t", SweepFamily::t}, {"sweep-snr", SweepFamily::snr}};
    if (inv.subcommand == "demo") {
      Json j = Json::object();
      apply_overrides(j, inv.overrides);
      ExperimentConfig cfg = demo_config();
      if (!j.empty()) {
        Json base = {{"L_values", cfg.L_values}, {"N_grid", cfg.N_grid}, {"trials", cfg.trials}};
        base.update(j);
        cfg = config_from_json(base);
      }
      const SweepResult result = sweep(cfg, SweepFamily::n, inv.threads);
      print_sweep_summary(result, log);
      if (!inv.out_path.empty()) write_file_atomic(inv.out_path, to_csv(result));
      return 0;
    }
    if (inv.config_path.empty()) throw ConfigError("config", "--config is required");
    if (inv.out_path.empty()) throw ConfigError("out", "--out is required");
    const ExperimentConfig cfg = parse_config(inv.config_path, inv.overrides);
    if (auto it = families.find(inv.subcommand); it != families.end()) {
      const SweepResult result = sweep(cfg, it->second, inv.threads);
      print_sweep_summary(result, log);
      write_file_atomic(inv.out_path, to_csv(result));
      return 0;
    }
    if (inv.subcommand == "theorem1") {
      const Theorem1Report report = verify_theorem1(cfg, inv.threads);
      print_theorem1_summary(report, log);
      write_file_atomic(inv.out_path, to_csv(report));
      return 0;
    }
    err << "error: unknown subcommand '" << inv.subcommand << "'\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ddpc
