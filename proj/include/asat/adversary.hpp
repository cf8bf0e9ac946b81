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

// Projected-gradient attacks on the rescaled constraint set and the
// dataset-level robustness estimate built on them.

#ifndef ASAT_ADVERSARY_HPP_
#define ASAT_ADVERSARY_HPP_

#include <cmath>
#include <span>
#include <vector>

#include "asat/baselines.hpp"
#include "asat/constraint_geometry.hpp"
#include "asat/data.hpp"
#include "asat/errors.hpp"
#include "asat/models.hpp"
#include "asat/parallel.hpp"

namespace asat {

struct AttackConfig {
  ConstraintSet constraint;
  int steps = 3;
  double step_size = 0.0;

  // tau = 1.5 * epsilon / K
  static AttackConfig with_default_step(ConstraintSet constraint, int steps) {
    const double tau = 1.5 * constraint.epsilon / static_cast<double>(steps);
    return AttackConfig{std::move(constraint), steps, tau};
  }

  void validate() const {
    constraint.validate();
    if (steps < 1) throw ConfigError("attack steps K must be >= 1");
    if (!(step_size >= 0.0) || !std::isfinite(step_size)) {
      throw ConfigError("attack step size must be finite and >= 0");
    }
    if (step_size == 0.0 && constraint.epsilon > 0.0) {
      throw ConfigError("attack step size must be > 0");
    }
  }
};

// Runs K projected steps from delta_0 = 0 and calls
//   visit(k, delta_k, loss_k, gradients_at_k)
// for k = 0..K, i.e. K + 1 forward/backward passes. Each step direction is
// the rescaled steepest-ascent solution with radius tau and the same scales
// as the outer set.
template <typename Visitor>
void pgd_walk(const Model& model, std::span<const double> x, double y,
              const AttackConfig& cfg, Visitor&& visit) {
  const ConstraintSet& outer = cfg.constraint;
  outer.check_dim(x.size());
  const ConstraintSet step_set = outer.with_radius(cfg.step_size);
  const std::size_t k_dim = x.size();
  Perturbation delta(k_dim, 0.0);
  std::vector<double> shifted(k_dim);
  for (int k = 0; k <= cfg.steps; ++k) {
    for (std::size_t i = 0; i < k_dim; ++i) shifted[i] = x[i] + delta[i];
    const LossTape recorded = forward_loss(model, shifted, y);
    const GradientPair grads = backward(recorded);
    visit(k, static_cast<const Perturbation&>(delta), recorded.loss, grads);
    if (k == cfg.steps) break;
    const FgsmStep u = fgsm_direction(grads.grad_input, step_set);
    for (std::size_t i = 0; i < k_dim; ++i) delta[i] += u.delta[i];
    delta = project(delta, outer);
  }
}

// All K + 1 iterates delta_0 .. delta_K.
inline std::vector<Perturbation> pgd_attack(const Model& model,
                                            std::span<const double> x, double y,
                                            const AttackConfig& cfg) {
  cfg.validate();
  std::vector<Perturbation> deltas;
  deltas.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  pgd_walk(model, x, y, cfg,
           [&](int, const Perturbation& d, double, const GradientPair&) {
             deltas.push_back(d);
           });
  return deltas;
}

struct RobustnessReport {
  double clean_loss = 0.0;
  double attacked_loss = 0.0;
  double robustness_gap = 0.0;
  MetricsReport clean;
  MetricsReport attacked;
};

// Mean over instances of max_k L(x + delta_k) - L(x), taking the strongest
// iterate of each PGD trajectory as the inner maximizer. Per-instance work
// is spread over `workers`; sums run in index order.
inline RobustnessReport evaluate_robustness(const Model& model,
                                            std::span<const Instance> data,
                                            const AttackConfig& cfg,
                                            std::size_t workers = 1) {
  if (data.empty()) throw EmptyInputError("evaluate_robustness on an empty dataset");
  cfg.validate();
  struct Cell {
    double clean_loss, attacked_loss, clean_pred, attacked_pred;
  };
  std::vector<Cell> cells(data.size());
  parallel_for(data.size(), workers, [&](std::size_t n) {
    const Instance& inst = data[n];
    Cell cell{};
    int best_k = -1;
    Perturbation best_delta;
    pgd_walk(model, inst.features, inst.target, cfg,
             [&](int k, const Perturbation& d, double loss, const GradientPair&) {
               if (k == 0) cell.clean_loss = loss;
               if (best_k < 0 || loss > cell.attacked_loss) {
                 best_k = k;
                 cell.attacked_loss = loss;
                 best_delta = d;
               }
             });
    std::vector<double> shifted(inst.features);
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += best_delta[i];
    cell.clean_pred = model.predict(inst.features);
    cell.attacked_pred = model.predict(shifted);
    cells[n] = cell;
  });

  RobustnessReport report;
  std::vector<PredictionPair> clean_pairs;
  std::vector<PredictionPair> attacked_pairs;
  for (std::size_t n = 0; n < data.size(); ++n) {
    report.clean_loss += cells[n].clean_loss;
    report.attacked_loss += cells[n].attacked_loss;
    clean_pairs.push_back({cells[n].clean_pred, data[n].target, data[n].x_last});
    attacked_pairs.push_back({cells[n].attacked_pred, data[n].target, data[n].x_last});
  }
  const auto count = static_cast<double>(data.size());
  report.clean_loss /= count;
  report.attacked_loss /= count;
  report.robustness_gap = report.attacked_loss - report.clean_loss;
  report.clean = compute_metrics(clean_pairs);
  report.attacked = compute_metrics(attacked_pairs);
  return report;
}

}  // namespace asat

#endif  // ASAT_ADVERSARY_HPP_
