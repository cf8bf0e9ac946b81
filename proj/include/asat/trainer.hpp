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

// Mini-batch Adam training, either on the clean loss or on the mean of the
// K + 1 adversarial risks collected along each PGD trajectory, with
// best-dev-epoch checkpoint selection.

#ifndef ASAT_TRAINER_HPP_
#define ASAT_TRAINER_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asat/adversary.hpp"
#include "asat/baselines.hpp"
#include "asat/constraint_geometry.hpp"
#include "asat/data.hpp"
#include "asat/errors.hpp"
#include "asat/models.hpp"
#include "asat/rng.hpp"

namespace asat {

enum class TrainMode { Plain, Asat };

inline std::string_view to_string(TrainMode mode) {
  return mode == TrainMode::Plain ? "plain" : "asat";
}

inline TrainMode parse_train_mode(std::string_view text) {
  if (text == "plain") return TrainMode::Plain;
  if (text == "asat") return TrainMode::Asat;
  throw ConfigError("unknown training mode '" + std::string(text) + "'");
}

struct TrainConfig {
  int epochs = 5;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::Plain;
  // Adversarial settings (Asat mode). The scale vector comes from `decay`
  // applied to the dataset layout's timestamp ranks.
  Norm norm = Norm::Linf;
  double epsilon = 0.02;
  int steps = 3;
  std::optional<double> step_size;  // defaults to 1.5 * epsilon / steps
  DecaySpec decay{DecayKind::Exp, 0.7, 1};

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  }

  AttackConfig attack_for(const Layout& layout) const {
    DecaySpec spec = decay;
    spec.horizon = layout.horizon();
    ConstraintSet set{norm, epsilon, build_scales(spec, layout.ranks())};
    AttackConfig cfg = AttackConfig::with_default_step(std::move(set), steps);
    if (step_size) cfg.step_size = *step_size;
    cfg.validate();
    return cfg;
  }
};

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// Bias-corrected Adam. Returns false, leaving state and theta untouched, when
// the gradient holds a non-finite entry.
inline bool adam_step(AdamState& state, std::span<double> theta,
                      std::span<const double> grad, double lr) {
  if (theta.size() != grad.size() || state.m.size() != theta.size()) {
    throw ShapeError("adam_step: theta, grad and state lengths differ");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) return false;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(AdamState::kBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(AdamState::kBeta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = AdamState::kBeta1 * state.m[i] + (1.0 - AdamState::kBeta1) * grad[i];
    state.v[i] = AdamState::kBeta2 * state.v[i] + (1.0 - AdamState::kBeta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    theta[i] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::kEps);
  }
  return true;
}

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int selected_epoch = 0;
  std::optional<MetricsReport> test_metrics;
  std::uint64_t forward_passes = 0;
  std::uint64_t updates = 0;
  std::uint64_t skipped_updates = 0;
  std::uint64_t constraint_violations = 0;
};

struct TrainResult {
  Model model;
  TrainReport report;
};

namespace detail {

// Running mean m_j = m_{j-1} + (x_j - m_{j-1}) / j; exact when every term is
// identical, which keeps a zero-radius adversarial run bit-equal to plain
// training.
inline void running_mean(std::vector<double>& mean, std::span<const double> x,
                         int count) {
  if (count == 1) {
    mean.assign(x.begin(), x.end());
    return;
  }
  for (std::size_t i = 0; i < mean.size(); ++i) {
    mean[i] += (x[i] - mean[i]) / static_cast<double>(count);
  }
}

inline double dev_mse(const Model& model, const Dataset& dev) {
  double s = 0.0;
  for (const Instance& inst : dev.instances) {
    const double r = model.predict(inst.features) - inst.target;
    s += r * r;
  }
  return s / static_cast<double>(dev.size());
}

inline TrainResult train(Model model, const Dataset& train_set,
                         const Dataset& dev_set, const TrainConfig& cfg,
                         const Dataset* test_set) {
  cfg.validate();
  if (train_set.empty()) throw EmptyInputError("training split is empty");
  if (dev_set.empty()) throw EmptyInputError("dev split is empty");
  if (train_set.layout.dim() != model.input_dim()) {
    throw ShapeError("dataset dimension does not match the model");
  }
  const bool adversarial = cfg.mode == TrainMode::Asat;
  std::optional<AttackConfig> attack;
  if (adversarial) attack = cfg.attack_for(train_set.layout);

  const std::size_t n_params = model.theta().size();
  AdamState adam(n_params);
  TrainReport report;
  std::vector<double> best_theta(model.theta().begin(), model.theta().end());
  double best_dev = 0.0;

  std::vector<std::size_t> order(train_set.size());
  std::vector<double> batch_grad(n_params);
  std::vector<double> instance_grad(n_params);
  const SplitMix64 root(cfg.seed);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng = root.split(static_cast<std::uint64_t>(epoch));
    shuffle(std::span<std::size_t>(order), rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const Instance& inst = train_set.instances[order[b]];
        double instance_loss = 0.0;
        if (adversarial) {
          pgd_walk(model, inst.features, inst.target, *attack,
                   [&](int k, const Perturbation& delta, double loss,
                       const GradientPair& grads) {
                     ++report.forward_passes;
                     if (!attack->constraint.contains(delta)) ++report.constraint_violations;
                     const int count = k + 1;
                     running_mean(instance_grad, grads.grad_params, count);
                     instance_loss = count == 1 ? loss
                                                : instance_loss + (loss - instance_loss) / count;
                   });
        } else {
          const LossTape recorded = forward_loss(model, inst.features, inst.target);
          ++report.forward_passes;
          const GradientPair grads = backward(recorded);
          running_mean(instance_grad, grads.grad_params, 1);
          instance_loss = recorded.loss;
        }
        for (std::size_t i = 0; i < n_params; ++i) batch_grad[i] += instance_grad[i];
        epoch_loss += instance_loss;
      }
      const auto batch_n = static_cast<double>(end - start);
      for (double& g : batch_grad) g /= batch_n;
      if (adam_step(adam, model.mutable_theta(), batch_grad, cfg.learning_rate)) {
        ++report.updates;
      } else {
        ++report.skipped_updates;
      }
    }

    EpochRecord record{epoch, epoch_loss / static_cast<double>(train_set.size()),
                       dev_mse(model, dev_set)};
    report.epochs.push_back(record);
    if (epoch == 1 || record.dev_loss < best_dev) {
      best_dev = record.dev_loss;
      report.selected_epoch = epoch;
      best_theta.assign(model.theta().begin(), model.theta().end());
    }
  }
  model.set_theta(std::move(best_theta));
  if (test_set != nullptr && !test_set->empty()) {
    report.test_metrics = evaluate(model, test_set->instances);
  }
  return TrainResult{std::move(model), std::move(report)};
}

}  // namespace detail

// Minimizes the batch-mean squared error; returns the lowest-dev-loss epoch's
// parameters.
inline TrainResult train_plain(Model model, const Dataset& train_set,
                               const Dataset& dev_set, TrainConfig cfg,
                               const Dataset* test_set = nullptr) {
  cfg.mode = TrainMode::Plain;
  return detail::train(std::move(model), train_set, dev_set, cfg, test_set);
}

// Per batch: runs K-step PGD per instance, averages the K + 1 risks
// L(f(x + delta_k), y), k = 0..K, and takes one Adam step on that mean.
// Perturbations are constants with respect to theta.
inline TrainResult train_asat(Model model, const Dataset& train_set,
                              const Dataset& dev_set, TrainConfig cfg,
                              const Dataset* test_set = nullptr) {
  cfg.mode = TrainMode::Asat;
  return detail::train(std::move(model), train_set, dev_set, cfg, test_set);
}

inline TrainResult train(Model model, const Dataset& train_set,
                         const Dataset& dev_set, const TrainConfig& cfg,
                         const Dataset* test_set = nullptr) {
  return detail::train(std::move(model), train_set, dev_set, cfg, test_set);
}

inline void save_train_report(const TrainReport& report, const std::string& path,
                              const std::string& comment = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "epoch,train_loss,dev_loss,selected\n";
  std::string line;
  for (const EpochRecord& r : report.epochs) {
    line.clear();
    line += std::to_string(r.epoch) + ',';
    append_double(line, r.train_loss);
    line += ',';
    append_double(line, r.dev_loss);
    line += r.epoch == report.selected_epoch ? ",1\n" : ",0\n";
    out << line;
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace asat

#endif  // ASAT_TRAINER_HPP_
