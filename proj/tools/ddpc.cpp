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

#include <CLI11.hpp>

#include "ddpc/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Direct vs indirect data-driven predictive control benchmark"};
  app.require_subcommand(1);

  ddpc::CliInvocation inv;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* cfg = sub->add_option("--config", inv.config_path, "JSON experiment config");
    auto* out = sub->add_option("--out", inv.out_path, "CSV output path");
    if (needs_config) {
      cfg->required()->check(CLI::ExistingFile);
      out->required();
    }
    sub->add_option("--set", inv.overrides, "Override a config key (key=value), repeatable")
        ->allow_extra_args(false);
    sub->add_option("--threads", inv.threads, "Worker threads (0 = auto)")->default_val(0);
  };

  add_common(app.add_subcommand("sweep-n", "Gap vs N for every L in L_values"), true);
  add_common(app.add_subcommand("sweep-t", "Gap vs N for every horizon in t_grid"), true);
  add_common(app.add_subcommand("sweep-snr", "Gap vs N for every SNR in snr_grid"), true);
  add_common(app.add_subcommand("theorem1", "Empirical check of the implicit-model tail bound"), true);
  add_common(app.add_subcommand("demo", "Small built-in N sweep"), false);

  CLI11_PARSE(app, argc, argv);
  inv.subcommand = app.get_subcommands().front()->get_name();
  return ddpc::run(inv);
}
