/*
 * Copyright 2026 The ASAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// asat: command line front end.
//
//   asat gen-data    --config cfg.json --out data/
//   asat train       --config cfg.json [--decay-sweep]
//   asat attack      --config cfg.json --checkpoint out/model.txt
//   asat probe       --config cfg.json
//   asat grid-search --config cfg.json --workers 4
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "asat/experiment.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> data_dir;
  std::optional<std::string> checkpoint;
  std::optional<std::size_t> workers;
  bool decay_sweep = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment config");
  cmd->add_option("--seed", o.seed, "Run seed (overrides the config)");
  cmd->add_option("--out", o.out, "Output directory (overrides the config)");
  cmd->add_option("--data-dir", o.data_dir, "Read train/dev/test CSVs from this directory");
  cmd->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
}

// flags > file > defaults
asat::ExperimentConfig resolve(const Overrides& o) {
  asat::ExperimentConfig cfg;
  if (!o.config_path.empty()) cfg = asat::load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out_dir = *o.out;
  if (o.data_dir) cfg.data_dir = *o.data_dir;
  if (o.checkpoint) cfg.checkpoint = *o.checkpoint;
  if (o.workers) cfg.workers = *o.workers;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptively scaled adversarial training for volume forecasting"};
  app.require_subcommand(1);
  Overrides o;

  auto* gen = app.add_subcommand("gen-data", "Generate synthetic train/dev/test CSVs");
  add_common(gen, o);
  auto* train = app.add_subcommand("train", "Train a model (plain or ASAT)");
  add_common(train, o);
  train->add_flag("--decay-sweep", o.decay_sweep,
                  "Run ASAT once per decay function with a shared seed");
  auto* attack = app.add_subcommand("attack", "Robustness sweep over epsilon and norm");
  add_common(attack, o);
  attack->add_option("--checkpoint", o.checkpoint, "Model checkpoint to attack");
  auto* probe = app.add_subcommand("probe", "Dimension-wise adversarial sensitivity");
  add_common(probe, o);
  probe->add_option("--checkpoint", o.checkpoint, "Model checkpoint to probe");
  auto* grid = app.add_subcommand("grid-search", "ASAT grid over epsilon, gamma, norm");
  add_common(grid, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const asat::ExperimentConfig cfg = resolve(o);
    if (gen->parsed()) {
      const auto data = asat::cmd_gen_data(cfg);
      std::cout << "wrote " << data.train.size() << " train, " << data.dev.size()
                << " dev, " << data.test.size() << " test instances to " << cfg.out_dir
                << "\n";
    } else if (train->parsed()) {
      if (o.decay_sweep) {
        for (const auto& row : asat::cmd_decay_sweep(cfg)) {
          std::cout << asat::to_string(row.kind) << ": dev_mse=" << row.dev_mse
                    << " test_mse=" << row.test.mse << "\n";
        }
      } else {
        const auto result = asat::cmd_train(cfg);
        for (const auto& e : result.report.epochs) {
          std::cout << "epoch " << e.epoch << " train_loss=" << e.train_loss
                    << " dev_loss=" << e.dev_loss << "\n";
        }
        std::cout << "selected epoch " << result.report.selected_epoch
                  << ", test mse=" << result.report.test_metrics->mse << "\n";
      }
    } else if (attack->parsed()) {
      for (const auto& row : asat::cmd_attack(cfg)) {
        std::cout << "eps=" << row.epsilon << " " << asat::to_string(row.norm)
                  << " clean_mse=" << row.report.clean.mse
                  << " attacked_mse=" << row.report.attacked.mse << "\n";
      }
    } else if (probe->parsed()) {
      const auto result = asat::cmd_probe(cfg);
      std::cout << "probed " << result.dataset.per_dim.size() << " dimensions\n";
    } else if (grid->parsed()) {
      const auto rows = asat::cmd_grid_search(cfg);
      const auto& best = rows.front();
      std::cout << rows.size() << " cells; best " << asat::to_string(best.norm)
                << " eps=" << best.epsilon << " gamma=" << best.gamma
                << " dev_mse=" << best.dev_mse << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "asat: " << e.what() << "\n";
    return asat::exit_code_for(e);
  }
  return 0;
}
