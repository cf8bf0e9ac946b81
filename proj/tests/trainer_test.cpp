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

#include "asat/trainer.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace asat {
namespace {

using ::asat::testing::linear_dataset;
using ::asat::testing::random_model;

// Solves the normal equations [X 1]^T [X 1] w = [X 1]^T y by Gaussian
// elimination with partial pivoting.
std::vector<double> least_squares(const Dataset& d) {
  const std::size_t n = d.layout.dim() + 1;
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (const Instance& inst : d.instances) {
    std::vector<double> row(inst.features);
    row.push_back(1.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a[i][j] += row[i] * row[j];
      a[i][n] += row[i] * inst.target;
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= n; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = a[i][n] / a[i][i];
  return w;
}

std::vector<double> params_of(const Model& m) { return {m.theta().begin(), m.theta().end()}; }

TrainConfig quick_config(int epochs = 3) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e-2;
  cfg.seed = 99;
  return cfg;
}

TEST(AdamTest, ZeroGradientLeavesThetaUnchanged) {
  AdamState state(3);
  std::vector<double> theta = {0.5, -1.0, 2.0};
  const std::vector<double> grad(3, 0.0);
  ASSERT_TRUE(adam_step(state, theta, grad, 1e-3));
  EXPECT_EQ(theta, (std::vector<double>{0.5, -1.0, 2.0}));
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  // Bias correction makes the first step lr * g / (|g| + eps).
  AdamState state(1);
  std::vector<double> theta = {0.0};
  const std::vector<double> grad = {1.0};
  adam_step(state, theta, grad, 1e-3);
  EXPECT_NEAR(theta[0], -1e-3, 1e-10);
  EXPECT_EQ(state.step, 1);
}

TEST(AdamTest, NonFiniteGradientIsSkipped) {
  AdamState state(2);
  std::vector<double> theta = {1.0, 2.0};
  const std::vector<double> grad = {std::numeric_limits<double>::quiet_NaN(), 1.0};
  EXPECT_FALSE(adam_step(state, theta, grad, 1e-3));
  EXPECT_EQ(theta, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(state.step, 0);
}

TEST(TrainPlainTest, RecoversExactLinearRelation) {
  const std::vector<double> w = {0.3, -0.2, 0.1, 0.25};
  const Dataset train = linear_dataset(w, 0.05, 400, 1);
  const Dataset dev = linear_dataset(w, 0.05, 100, 2);
  const auto oracle = least_squares(train);
  for (std::size_t i = 0; i < w.size(); ++i) ASSERT_NEAR(oracle[i], w[i], 1e-10);
  TrainConfig cfg = quick_config(60);
  const auto result = train_plain(Model::init(ArchDescriptor::linear(4), 1), train, dev, cfg);
  EXPECT_LT(result.report.epochs[result.report.selected_epoch - 1].dev_loss, 1e-3);
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_NEAR(result.model.theta()[i], oracle[i], 0.03);
  }
}

TEST(TrainPlainTest, RejectsBadConfigAndEmptySplits) {
  const Dataset d = linear_dataset({0.1, 0.2}, 0.0, 10, 3);
  const Model m = Model::init(ArchDescriptor::linear(2), 0);
  TrainConfig cfg = quick_config(0);
  EXPECT_THROW(train_plain(m, d, d, cfg), ConfigError);
  cfg = quick_config();
  Dataset empty{d.layout, {}};
  EXPECT_THROW(train_plain(m, empty, d, cfg), EmptyInputError);
  EXPECT_THROW(train_plain(m, d, empty, cfg), EmptyInputError);
}

TEST(TrainTest, IsDeterministic) {
  const Dataset train = linear_dataset({0.1, -0.3, 0.2}, 0.1, 60, 4, 0.05);
  const Dataset dev = linear_dataset({0.1, -0.3, 0.2}, 0.1, 20, 5, 0.05);
  const auto arch = ArchDescriptor::mlp(3, {4});
  for (TrainMode mode : {TrainMode::Plain, TrainMode::Asat}) {
    TrainConfig cfg = quick_config();
    cfg.mode = mode;
    const auto a = asat::train(Model::init(arch, 7), train, dev, cfg);
    const auto b = asat::train(Model::init(arch, 7), train, dev, cfg);
    EXPECT_EQ(params_of(a.model), params_of(b.model));
  }
}

TEST(TrainAsatTest, ZeroRadiusMatchesPlainBitwise) {
  const Dataset train = linear_dataset({0.4, -0.3, 0.2, 0.1, 0.0}, 0.0, 50, 6, 0.1);
  const Dataset dev = linear_dataset({0.4, -0.3, 0.2, 0.1, 0.0}, 0.0, 20, 7, 0.1);
  for (const auto& arch : {ArchDescriptor::linear(5), ArchDescriptor::mlp(5, {4}),
                           ArchDescriptor::attn(1, 5, 3)}) {
    TrainConfig cfg = quick_config();
    cfg.epsilon = 0.0;
    const auto plain = train_plain(Model::init(arch, 3), train, dev, cfg);
    const auto adv = train_asat(Model::init(arch, 3), train, dev, cfg);
    EXPECT_EQ(params_of(plain.model), params_of(adv.model));
    EXPECT_EQ(plain.report.selected_epoch, adv.report.selected_epoch);
  }
}

TEST(TrainAsatTest, CountsForwardPassesAndStaysFeasible) {
  const Dataset train = linear_dataset({0.4, -0.3, 0.2}, 0.0, 37, 8, 0.1);
  const Dataset dev = linear_dataset({0.4, -0.3, 0.2}, 0.0, 10, 9, 0.1);
  TrainConfig cfg = quick_config(2);
  cfg.steps = 4;
  cfg.epsilon = 0.5;
  cfg.norm = Norm::L2;
  cfg.decay = DecaySpec{DecayKind::Linear, 0.2, 1};
  const auto r = train_asat(Model::init(ArchDescriptor::mlp(3, {4}), 1), train, dev, cfg);
  EXPECT_EQ(r.report.forward_passes, 2u * 37u * 5u);
  EXPECT_EQ(r.report.constraint_violations, 0u);
  EXPECT_EQ(r.report.updates, 2u * 5u);  // ceil(37 / 8) batches per epoch
  EXPECT_EQ(r.report.skipped_updates, 0u);
}

TEST(TrainAsatTest, AccumulatedGradientMatchesSingleTapeBackward) {
  // The mean of the K + 1 per-step gradients equals the gradient of the mean
  // risk built on one tape with the perturbations held constant.
  SplitMix64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const Model m = random_model(ArchDescriptor::mlp(4, {3}), rng);
    const auto x = ::asat::testing::random_vector(rng, 4);
    const double y = rng.uniform(-1, 1);
    const auto cfg = AttackConfig::with_default_step(
        ConstraintSet{Norm::Linf, 0.3, ScaleVector({1, 0.7, 0.49, 0.343})}, 3);
    std::vector<double> mean(m.theta().size());
    pgd_walk(m, x, y, cfg, [&](int k, const Perturbation&, double, const GradientPair& g) {
      detail::running_mean(mean, g.grad_params, k + 1);
    });
    const auto deltas = pgd_attack(m, x, y, cfg);
    Tape tape;
    const auto params = m.bind(tape);
    Tape::NodeId stacked = 0;
    for (const auto& d : deltas) {
      Matrix in(1, x.size());
      for (std::size_t i = 0; i < x.size(); ++i) in.data[i] = x[i] + d[i];
      const auto pred = m.forward(tape, params, tape.constant(in));
      const auto diff = tape.sub(pred, tape.constant(Matrix(1, 1, y)));
      const auto risk = tape.square(diff);
      stacked = &d == &deltas.front() ? risk : tape.concat_rows(stacked, risk);
    }
    const auto grads = tape.gradients(tape.mean(stacked));
    for (std::size_t i = 0; i < mean.size(); ++i) {
      EXPECT_NEAR(mean[i], grads.grad_params[i], 1e-10);
    }
  }
}

TEST(TrainTest, RestoresBestDevEpoch) {
  const Dataset train = linear_dataset({0.5, -0.5}, 0.0, 40, 13, 0.3);
  const Dataset dev = linear_dataset({0.5, -0.5}, 0.0, 15, 14, 0.3);
  TrainConfig cfg = quick_config(8);
  cfg.learning_rate = 0.2;
  const auto r = train_plain(Model::init(ArchDescriptor::linear(2), 0), train, dev, cfg);
  const auto& epochs = r.report.epochs;
  ASSERT_EQ(epochs.size(), 8u);
  double best = epochs[0].dev_loss;
  int best_epoch = 1;
  for (const auto& e : epochs) {
    if (e.dev_loss < best) {
      best = e.dev_loss;
      best_epoch = e.epoch;
    }
  }
  EXPECT_EQ(r.report.selected_epoch, best_epoch);
  EXPECT_EQ(detail::dev_mse(r.model, dev), best);
}

TEST(TrainTest, WritesReportCsv) {
  const Dataset d = linear_dataset({0.5}, 0.0, 10, 15);
  const auto r = train_plain(Model::init(ArchDescriptor::linear(1), 0), d, d, quick_config(2));
  ::asat::testing::TempDir dir("train_report");
  save_train_report(r.report, dir.str("r.csv"), "hello");
  const std::string text = ::asat::testing::read_file(dir.str("r.csv"));
  EXPECT_EQ(text.rfind("# hello\nepoch,train_loss,dev_loss,selected\n1,", 0), 0u);
}

}  // namespace
}  // namespace asat
