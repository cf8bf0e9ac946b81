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

// Configuration-driven experiments behind the `asat` command line tool. Every
// command is a deterministic function of (config, seed) and writes CSV files
// that start with a `# asat config_hash=... seed=...` comment line.

#ifndef ASAT_EXPERIMENT_HPP_
#define ASAT_EXPERIMENT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "asat/adversary.hpp"
#include "asat/baselines.hpp"
#include "asat/constraint_geometry.hpp"
#include "asat/data.hpp"
#include "asat/errors.hpp"
#include "asat/models.hpp"
#include "asat/parallel.hpp"
#include "asat/sensitivity.hpp"
#include "asat/trainer.hpp"

namespace asat {

struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  std::size_t workers = 0;  // 0 = available cores

  // Data: CSVs from `data_dir` when set, otherwise generated in memory.
  std::string data_dir;
  GeneratorParams generator;
  bool same_day_slots = false;
  double test_fraction = 2.0 / 14.0;

  ArchDescriptor arch = ArchDescriptor::linear(160);
  TrainConfig train;

  // Evaluation attack sweep. Defaults to unscaled (alpha = 1) sets.
  std::string checkpoint;  // defaults to <out_dir>/model.txt
  std::string eval_split = "test";
  std::vector<double> attack_epsilons = {0.0, 0.05, 0.1, 0.2, 0.5};
  std::vector<Norm> attack_norms = {Norm::L2, Norm::Linf};
  int attack_steps = 3;
  DecaySpec attack_decay{DecayKind::Const, 1.0, 1};

  double probe_epsilon = 1.0;
  int probe_grid_points = 9;
  long probe_instance = -1;  // < 0: dataset scope only

  std::vector<double> grid_epsilons = {0.001, 0.002, 0.005, 0.01, 0.02,
                                       0.05,  0.1,   0.2,   0.5,  1.0};
  std::vector<double> grid_gammas = {0.1, 0.2, 0.3, 0.4, 0.5,
                                     0.6, 0.7, 0.8, 0.9, 0.95};
  std::vector<Norm> grid_norms = {Norm::L2, Norm::Linf};

  std::size_t effective_workers() const {
    return workers == 0 ? default_workers() : workers;
  }

  std::string checkpoint_path() const {
    return checkpoint.empty() ? (std::filesystem::path(out_dir) / "model.txt").string()
                              : checkpoint;
  }

  void validate() const {
    generator.validate();
    arch.validate();
    train.validate();
    train.decay.validate();
    attack_decay.validate();
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
      throw ConfigError("test_fraction must lie in (0, 1)");
    }
    if (attack_steps < 1) throw ConfigError("attack.steps must be >= 1");
    for (double e : attack_epsilons) {
      if (!(e >= 0.0)) throw ConfigError("attack epsilons must be >= 0");
    }
    for (double e : grid_epsilons) {
      if (!(e >= 0.0)) throw ConfigError("grid epsilons must be >= 0");
    }
    for (double g : grid_gammas) {
      if (!(g > 0.0 && g <= 1.0)) throw ConfigError("grid gammas must lie in (0, 1]");
    }
    if (eval_split != "train" && eval_split != "dev" && eval_split != "test") {
      throw ConfigError("eval_split must be train, dev or test");
    }
  }

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);

  // FNV-1a over the canonical JSON, excluding out_dir and workers (neither
  // changes any computed value).
  std::uint64_t hash() const {
    nlohmann::json j = to_json();
    j.erase("out_dir");
    j.erase("workers");
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::string provenance() const {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "asat config_hash=%016llx seed=%llu",
                  static_cast<unsigned long long>(hash()),
                  static_cast<unsigned long long>(seed));
    return buf;
  }
};

namespace detail {

inline std::vector<std::string> norm_names(const std::vector<Norm>& norms) {
  std::vector<std::string> out;
  for (Norm n : norms) out.emplace_back(to_string(n));
  return out;
}

inline std::vector<Norm> parse_norms(const nlohmann::json& j) {
  std::vector<Norm> out;
  for (const auto& item : j) out.push_back(parse_norm(item.get<std::string>()));
  return out;
}

// Copies j[key] into `value` when present, rejecting unknown keys via `seen`.
template <typename T>
void read(const nlohmann::json& j, const char* key, T& value,
          std::vector<std::string>& seen) {
  seen.emplace_back(key);
  if (j.contains(key)) value = j.at(key).get<T>();
}

inline void reject_unknown(const nlohmann::json& j, const std::vector<std::string>& seen,
                           const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::find(seen.begin(), seen.end(), item.key()) == seen.end()) {
      throw ConfigError("unknown config key '" + where + item.key() + "'");
    }
  }
}

}  // namespace detail

inline nlohmann::json ExperimentConfig::to_json() const {
  using nlohmann::json;
  json j;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["workers"] = workers;
  const GeneratorParams& g = generator;
  j["data"] = {{"dir", data_dir},
               {"n_days", g.n_days},
               {"slots_per_day", g.slots_per_day},
               {"base_log_volume", g.base_log_volume},
               {"seasonal_amplitude", g.seasonal_amplitude},
               {"day_ar", g.day_ar},
               {"day_noise", g.day_noise},
               {"slot_ar", g.slot_ar},
               {"slot_noise", g.slot_noise},
               {"idio_noise", g.idio_noise},
               {"base_log_price", g.base_log_price},
               {"price_volatility", g.price_volatility},
               {"range_scale", g.range_scale},
               {"missing_rate", g.missing_rate},
               {"same_day_slots", same_day_slots},
               {"test_fraction", test_fraction}};
  j["model"] = {{"family", std::string(to_string(arch.family))},
                {"hidden", arch.hidden},
                {"width", arch.width == 0 ? std::size_t{16} : arch.width}};
  json t = {{"mode", std::string(to_string(train.mode))},
            {"epochs", train.epochs},
            {"batch_size", train.batch_size},
            {"learning_rate", train.learning_rate},
            {"norm", std::string(to_string(train.norm))},
            {"epsilon", train.epsilon},
            {"steps", train.steps},
            {"decay", std::string(to_string(train.decay.kind))},
            {"gamma", train.decay.gamma}};
  t["step_size"] = train.step_size ? json(*train.step_size) : json(nullptr);
  j["train"] = t;
  j["attack"] = {{"checkpoint", checkpoint},
                 {"split", eval_split},
                 {"epsilons", attack_epsilons},
                 {"norms", detail::norm_names(attack_norms)},
                 {"steps", attack_steps},
                 {"decay", std::string(to_string(attack_decay.kind))},
                 {"gamma", attack_decay.gamma}};
  j["probe"] = {{"epsilon", probe_epsilon},
                {"grid_points", probe_grid_points},
                {"instance", probe_instance}};
  j["grid"] = {{"epsilons", grid_epsilons},
               {"gammas", grid_gammas},
               {"norms", detail::norm_names(grid_norms)}};
  return j;
}

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    std::vector<std::string> top;
    detail::read(j, "seed", c.seed, top);
    detail::read(j, "out_dir", c.out_dir, top);
    detail::read(j, "workers", c.workers, top);
    for (const char* section : {"data", "model", "train", "attack", "probe", "grid"}) {
      top.emplace_back(section);
    }
    detail::reject_unknown(j, top, "");

    if (j.contains("data")) {
      const auto& d = j.at("data");
      std::vector<std::string> seen;
      GeneratorParams& g = c.generator;
      detail::read(d, "dir", c.data_dir, seen);
      detail::read(d, "n_days", g.n_days, seen);
      detail::read(d, "slots_per_day", g.slots_per_day, seen);
      detail::read(d, "base_log_volume", g.base_log_volume, seen);
      detail::read(d, "seasonal_amplitude", g.seasonal_amplitude, seen);
      detail::read(d, "day_ar", g.day_ar, seen);
      detail::read(d, "day_noise", g.day_noise, seen);
      detail::read(d, "slot_ar", g.slot_ar, seen);
      detail::read(d, "slot_noise", g.slot_noise, seen);
      detail::read(d, "idio_noise", g.idio_noise, seen);
      detail::read(d, "base_log_price", g.base_log_price, seen);
      detail::read(d, "price_volatility", g.price_volatility, seen);
      detail::read(d, "range_scale", g.range_scale, seen);
      detail::read(d, "missing_rate", g.missing_rate, seen);
      detail::read(d, "same_day_slots", c.same_day_slots, seen);
      detail::read(d, "test_fraction", c.test_fraction, seen);
      detail::reject_unknown(d, seen, "data.");
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      std::vector<std::string> seen;
      std::string family = "linear";
      std::vector<std::size_t> hidden = {32};
      std::size_t width = 16;
      detail::read(m, "family", family, seen);
      detail::read(m, "hidden", hidden, seen);
      detail::read(m, "width", width, seen);
      detail::reject_unknown(m, seen, "model.");
      const Layout layout = Layout::volume();
      switch (parse_family(family)) {
        case Family::Linear:
          c.arch = ArchDescriptor::linear(layout.dim());
          break;
        case Family::Mlp:
          c.arch = ArchDescriptor::mlp(layout.dim(), hidden);
          break;
        case Family::Attn:
          c.arch = ArchDescriptor::attn(layout.slots + layout.days, layout.features, width);
          break;
      }
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      std::vector<std::string> seen;
      std::string mode = "plain", norm = "linf", decay = "exp";
      detail::read(t, "mode", mode, seen);
      detail::read(t, "epochs", c.train.epochs, seen);
      detail::read(t, "batch_size", c.train.batch_size, seen);
      detail::read(t, "learning_rate", c.train.learning_rate, seen);
      detail::read(t, "norm", norm, seen);
      detail::read(t, "epsilon", c.train.epsilon, seen);
      detail::read(t, "steps", c.train.steps, seen);
      detail::read(t, "decay", decay, seen);
      detail::read(t, "gamma", c.train.decay.gamma, seen);
      seen.emplace_back("step_size");
      if (t.contains("step_size") && !t.at("step_size").is_null()) {
        c.train.step_size = t.at("step_size").get<double>();
      }
      detail::reject_unknown(t, seen, "train.");
      c.train.mode = parse_train_mode(mode);
      c.train.norm = parse_norm(norm);
      c.train.decay.kind = parse_decay_kind(decay);
    }
    if (j.contains("attack")) {
      const auto& a = j.at("attack");
      std::vector<std::string> seen;
      std::string decay = "const";
      detail::read(a, "checkpoint", c.checkpoint, seen);
      detail::read(a, "split", c.eval_split, seen);
      detail::read(a, "epsilons", c.attack_epsilons, seen);
      detail::read(a, "steps", c.attack_steps, seen);
      detail::read(a, "decay", decay, seen);
      detail::read(a, "gamma", c.attack_decay.gamma, seen);
      seen.emplace_back("norms");
      if (a.contains("norms")) c.attack_norms = detail::parse_norms(a.at("norms"));
      detail::reject_unknown(a, seen, "attack.");
      c.attack_decay.kind = parse_decay_kind(decay);
    }
    if (j.contains("probe")) {
      const auto& p = j.at("probe");
      std::vector<std::string> seen;
      detail::read(p, "epsilon", c.probe_epsilon, seen);
      detail::read(p, "grid_points", c.probe_grid_points, seen);
      detail::read(p, "instance", c.probe_instance, seen);
      detail::reject_unknown(p, seen, "probe.");
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      std::vector<std::string> seen;
      detail::read(g, "epsilons", c.grid_epsilons, seen);
      detail::read(g, "gammas", c.grid_gammas, seen);
      seen.emplace_back("norms");
      if (g.contains("norms")) c.grid_norms = detail::parse_norms(g.at("norms"));
      detail::reject_unknown(g, seen, "grid.");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

// ---------------------------------------------------------------------------
// Commands

namespace detail {

inline std::filesystem::path ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir + "'");
  }
  return std::filesystem::path(dir);
}

inline std::string num(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline const Dataset& pick_split(const SplitDataset& data, const std::string& name) {
  if (name == "train") return data.train;
  if (name == "dev") return data.dev;
  return data.test;
}

}  // namespace detail

struct GeneratedData {
  SplitDataset split;
  std::size_t skipped = 0;
};

inline GeneratedData generate_dataset(const ExperimentConfig& cfg) {
  const RawSeries raw = generate_synthetic(cfg.generator, cfg.seed);
  BuildResult built = build_instances(raw, cfg.same_day_slots);
  GeneratedData out;
  out.skipped = built.skipped;
  out.split = split(std::move(built.instances), Layout::volume(),
                    SplitMix64(cfg.seed).split(17).next(), cfg.test_fraction);
  return out;
}

inline SplitDataset load_data(const ExperimentConfig& cfg) {
  if (cfg.data_dir.empty()) return generate_dataset(cfg).split;
  const std::filesystem::path dir(cfg.data_dir);
  SplitDataset data;
  data.train = load_csv((dir / "train.csv").string());
  data.dev = load_csv((dir / "dev.csv").string());
  data.test = load_csv((dir / "test.csv").string());
  return data;
}

// Writes train.csv, dev.csv, test.csv and metadata.json under out_dir.
inline SplitDataset cmd_gen_data(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto dir = detail::ensure_out_dir(cfg.out_dir);
  GeneratedData gen = generate_dataset(cfg);
  const std::string note = cfg.provenance();
  save_csv(gen.split.train, (dir / "train.csv").string(), note);
  save_csv(gen.split.dev, (dir / "dev.csv").string(), note);
  save_csv(gen.split.test, (dir / "test.csv").string(), note);
  nlohmann::json meta = {{"config", cfg.to_json()},
                         {"config_hash", note},
                         {"train", gen.split.train.size()},
                         {"dev", gen.split.dev.size()},
                         {"test", gen.split.test.size()},
                         {"skipped", gen.skipped},
                         {"dim", Layout::volume().dim()}};
  meta["config"].erase("out_dir");
  meta["config"].erase("workers");
  detail::write_text(dir / "metadata.json", meta.dump(2) + "\n");
  return std::move(gen.split);
}

inline std::string metrics_row(const std::string& name, const std::string& split,
                               const MetricsReport& m) {
  return name + ',' + split + ',' + detail::num(m.mse) + ',' + detail::num(m.rmse) + ',' +
         detail::num(m.mae) + ',' + detail::num(m.acc) + '\n';
}

inline TrainResult run_training(const ExperimentConfig& cfg, const SplitDataset& data) {
  Model model = Model::init(cfg.arch, cfg.seed);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  TrainResult result = train(std::move(model), data.train, data.dev, tc, &data.test);
  for (double v : result.model.theta()) {
    if (!std::isfinite(v)) throw NumericError("training produced non-finite parameters");
  }
  return result;
}

// Trains per cfg.train.mode; writes model.txt, train_report.csv and
// metrics.csv (model and moving-average baselines on the test split).
inline TrainResult cmd_train(const ExperimentConfig& cfg) {
  cfg.validate();
  const SplitDataset data = load_data(cfg);
  const auto dir = detail::ensure_out_dir(cfg.out_dir);
  TrainResult result = run_training(cfg, data);
  const std::string note = cfg.provenance();
  save_model(result.model, (dir / "model.txt").string());
  save_train_report(result.report, (dir / "train_report.csv").string(), note);
  std::string metrics = "# " + note + "\nname,split,mse,rmse,mae,acc\n";
  const std::string label = std::string(to_string(cfg.arch.family)) + "_" +
                            std::string(to_string(cfg.train.mode));
  metrics += metrics_row(label, "test", *result.report.test_metrics);
  for (BaselineKind kind : kAllBaselines) {
    metrics += metrics_row(std::string(to_string(kind)), "test",
                           evaluate(BaselineSpec{kind, 0.04}, data.test));
  }
  detail::write_text(dir / "metrics.csv", metrics);
  return result;
}

struct DecaySweepRow {
  DecayKind kind;
  double dev_mse;
  MetricsReport test;
  int selected_epoch;
};

// Three ASAT runs sharing the seed, one per decay kind, each written to
// <out>/decay_<kind>/, plus a summary decay_sweep.csv.
inline std::vector<DecaySweepRow> cmd_decay_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto dir = detail::ensure_out_dir(cfg.out_dir);
  std::vector<DecaySweepRow> rows;
  std::string text = "# " + cfg.provenance() +
                     "\ndecay,gamma,dev_mse,test_mse,test_rmse,test_mae,test_acc,selected_epoch\n";
  for (DecayKind kind : {DecayKind::Const, DecayKind::Exp, DecayKind::Linear}) {
    ExperimentConfig sub = cfg;
    sub.train.mode = TrainMode::Asat;
    sub.train.decay.kind = kind;
    sub.out_dir = (dir / ("decay_" + std::string(to_string(kind)))).string();
    const TrainResult r = cmd_train(sub);
    const auto& rep = r.report;
    DecaySweepRow row{kind, rep.epochs[static_cast<std::size_t>(rep.selected_epoch - 1)].dev_loss,
                      *rep.test_metrics, rep.selected_epoch};
    text += std::string(to_string(kind)) + ',' + detail::num(cfg.train.decay.gamma) + ',' +
            detail::num(row.dev_mse) + ',' + detail::num(row.test.mse) + ',' +
            detail::num(row.test.rmse) + ',' + detail::num(row.test.mae) + ',' +
            detail::num(row.test.acc) + ',' + std::to_string(row.selected_epoch) + '\n';
    rows.push_back(row);
  }
  detail::write_text(dir / "decay_sweep.csv", text);
  return rows;
}

struct SweepRow {
  double epsilon;
  Norm norm;
  double gamma;
  RobustnessReport report;
};

// Robustness of the checkpoint for every (epsilon, norm); writes attack.csv.
inline std::vector<SweepRow> cmd_attack(const ExperimentConfig& cfg) {
  cfg.validate();
  const Model model = load_model(cfg.checkpoint_path());
  const SplitDataset data = load_data(cfg);
  const Dataset& eval = detail::pick_split(data, cfg.eval_split);
  const auto dir = detail::ensure_out_dir(cfg.out_dir);
  DecaySpec decay = cfg.attack_decay;
  decay.horizon = eval.layout.horizon();
  const ScaleVector scales = build_scales(decay, eval.layout.ranks());

  std::vector<SweepRow> rows;
  std::string text = "# " + cfg.provenance() +
                     "\nepsilon,p,gamma,clean_mse,attacked_mse,clean_acc,attacked_acc,gap\n";
  for (double eps : cfg.attack_epsilons) {
    for (Norm norm : cfg.attack_norms) {
      const AttackConfig attack =
          AttackConfig::with_default_step(ConstraintSet{norm, eps, scales}, cfg.attack_steps);
      SweepRow row{eps, norm, decay.gamma,
                   evaluate_robustness(model, eval.instances, attack, cfg.effective_workers())};
      const RobustnessReport& r = row.report;
      text += detail::num(eps) + ',' + std::string(to_string(norm)) + ',' +
              detail::num(decay.gamma) + ',' + detail::num(r.clean.mse) + ',' +
              detail::num(r.attacked.mse) + ',' + detail::num(r.clean.acc) + ',' +
              detail::num(r.attacked.acc) + ',' + detail::num(r.robustness_gap) + '\n';
      rows.push_back(std::move(row));
    }
  }
  detail::write_text(dir / "attack.csv", text);
  return rows;
}

struct ProbeResult {
  SensitivityReport dataset;
  std::optional<SensitivityReport> instance;
};

// Writes probe_dataset.csv and, when probe.instance >= 0, probe_instance.csv.
inline ProbeResult cmd_probe(const ExperimentConfig& cfg) {
  cfg.validate();
  const Model model = load_model(cfg.checkpoint_path());
  const SplitDataset data = load_data(cfg);
  const Dataset& eval = detail::pick_split(data, cfg.eval_split);
  if (cfg.probe_instance >= 0 &&
      static_cast<std::size_t>(cfg.probe_instance) >= eval.size()) {
    throw RangeError("probe instance " + std::to_string(cfg.probe_instance) +
                     " out of range (" + std::to_string(eval.size()) + " instances)");
  }
  const auto dir = detail::ensure_out_dir(cfg.out_dir);
  const std::string note = cfg.provenance();
  ProbeResult result;
  result.dataset = full_report(model, eval, cfg.probe_epsilon, cfg.probe_grid_points,
                               cfg.effective_workers());
  save_sensitivity_csv(result.dataset, (dir / "probe_dataset.csv").string(), note);
  if (cfg.probe_instance >= 0) {
    result.instance = instance_report(model, eval, static_cast<std::size_t>(cfg.probe_instance),
                                      cfg.probe_epsilon, cfg.probe_grid_points);
    save_sensitivity_csv(*result.instance, (dir / "probe_instance.csv").string(), note);
  }
  return result;
}

struct GridRow {
  Norm norm;
  double epsilon;
  double gamma;
  double dev_mse;
  MetricsReport test;
  int selected_epoch;
};

// ASAT training for every (norm, epsilon, gamma) cell on a worker pool;
// writes grid.csv sorted by dev MSE (ties keep grid order).
inline std::vector<GridRow> cmd_grid_search(const ExperimentConfig& cfg) {
  cfg.validate();
  const SplitDataset data = load_data(cfg);
  const auto dir = detail::ensure_out_dir(cfg.out_dir);
  struct Cell {
    Norm norm;
    double epsilon;
    double gamma;
  };
  std::vector<Cell> cells;
  for (Norm norm : cfg.grid_norms) {
    for (double eps : cfg.grid_epsilons) {
      for (double gamma : cfg.grid_gammas) cells.push_back({norm, eps, gamma});
    }
  }
  std::vector<GridRow> rows(cells.size());
  parallel_for(cells.size(), cfg.effective_workers(), [&](std::size_t i) {
    ExperimentConfig sub = cfg;
    sub.train.mode = TrainMode::Asat;
    sub.train.norm = cells[i].norm;
    sub.train.epsilon = cells[i].epsilon;
    sub.train.decay.gamma = cells[i].gamma;
    const TrainResult r = run_training(sub, data);
    const auto& rep = r.report;
    rows[i] = GridRow{cells[i].norm, cells[i].epsilon, cells[i].gamma,
                      rep.epochs[static_cast<std::size_t>(rep.selected_epoch - 1)].dev_loss,
                      *rep.test_metrics, rep.selected_epoch};
  });
  std::stable_sort(rows.begin(), rows.end(),
                   [](const GridRow& a, const GridRow& b) { return a.dev_mse < b.dev_mse; });
  std::string text = "# " + cfg.provenance() +
                     "\nnorm,epsilon,gamma,dev_mse,test_mse,test_rmse,test_mae,test_acc,"
                     "selected_epoch\n";
  for (const GridRow& r : rows) {
    text += std::string(to_string(r.norm)) + ',' + detail::num(r.epsilon) + ',' +
            detail::num(r.gamma) + ',' + detail::num(r.dev_mse) + ',' + detail::num(r.test.mse) +
            ',' + detail::num(r.test.rmse) + ',' + detail::num(r.test.mae) + ',' +
            detail::num(r.test.acc) + ',' + std::to_string(r.selected_epoch) + '\n';
  }
  detail::write_text(dir / "grid.csv", text);
  return rows;
}

// Process exit code for an error category.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const RangeError*>(&e)) return 2;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  if (dynamic_cast<const Error*>(&e)) return 3;
  return 1;
}

}  // namespace asat

#endif  // ASAT_EXPERIMENT_HPP_
