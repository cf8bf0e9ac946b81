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

#ifndef ASAT_BASELINES_HPP_
#define ASAT_BASELINES_HPP_

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asat/data.hpp"
#include "asat/errors.hpp"
#include "asat/models.hpp"

namespace asat {

struct MetricsReport {
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  double acc = 0.0;
};

struct PredictionPair {
  double predicted;
  double actual;
  double x_last;
};

// ACC counts (y_hat - x_last)(y - x_last) > 0; ties are incorrect.
inline MetricsReport compute_metrics(std::span<const PredictionPair> pairs) {
  if (pairs.empty()) throw EmptyInputError("compute_metrics on no predictions");
  double se = 0.0;
  double ae = 0.0;
  std::size_t hits = 0;
  for (const auto& p : pairs) {
    const double r = p.predicted - p.actual;
    se += r * r;
    ae += std::abs(r);
    if ((p.predicted - p.x_last) * (p.actual - p.x_last) > 0.0) ++hits;
  }
  const auto n = static_cast<double>(pairs.size());
  MetricsReport m;
  m.mse = se / n;
  m.rmse = std::sqrt(m.mse);
  m.mae = ae / n;
  m.acc = static_cast<double>(hits) / n;
  return m;
}

// Evaluates any callable `double(const Instance&)` over the instances.
template <typename Predictor>
MetricsReport evaluate_with(Predictor&& predict, std::span<const Instance> instances) {
  std::vector<PredictionPair> pairs;
  pairs.reserve(instances.size());
  for (const Instance& inst : instances) {
    pairs.push_back({predict(inst), inst.target, inst.x_last});
  }
  return compute_metrics(pairs);
}

inline MetricsReport evaluate(const Model& model,
                              std::span<const Instance> instances) {
  return evaluate_with([&](const Instance& inst) { return model.predict(inst.features); },
                  instances);
}

// ---------------------------------------------------------------------------
// Moving-average baselines over the log-volume history blocks.

enum class BaselineKind {
  NaiveYesterday,
  NaiveLastSlot,
  Sma20Day,
  Sma12Slot,
  Ema20Day,
  Ema12Slot,
  Combined,
};

inline constexpr BaselineKind kAllBaselines[] = {
    BaselineKind::NaiveYesterday, BaselineKind::NaiveLastSlot,
    BaselineKind::Sma20Day,       BaselineKind::Sma12Slot,
    BaselineKind::Ema20Day,       BaselineKind::Ema12Slot,
    BaselineKind::Combined};

inline std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::NaiveYesterday:
      return "naive_yesterday";
    case BaselineKind::NaiveLastSlot:
      return "naive_last_slot";
    case BaselineKind::Sma20Day:
      return "sma_20day";
    case BaselineKind::Sma12Slot:
      return "sma_12slot";
    case BaselineKind::Ema20Day:
      return "ema_20day";
    case BaselineKind::Ema12Slot:
      return "ema_12slot";
    case BaselineKind::Combined:
      return "sma_20day_12slot";
  }
  return "?";
}

struct BaselineSpec {
  BaselineKind kind = BaselineKind::Sma20Day;
  double rho = 0.04;

  void validate() const {
    if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("EMA rho must lie in (0, 1]");
  }
};

// y_1 = x_1, y_t = (1 - rho) y_{t-1} + rho x_t over oldest -> newest.
inline double ema(std::span<const double> oldest_to_newest, double rho) {
  if (oldest_to_newest.empty()) throw EmptyInputError("ema of an empty series");
  double y = oldest_to_newest.front();
  for (std::size_t t = 1; t < oldest_to_newest.size(); ++t) {
    y = (1.0 - rho) * y + rho * oldest_to_newest[t];
  }
  return y;
}

inline double sma(std::span<const double> values) {
  if (values.empty()) throw EmptyInputError("sma of an empty series");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

// Block log volumes ordered oldest -> newest.
inline std::vector<double> day_volumes(const Instance& inst, const Layout& layout) {
  std::vector<double> out;
  for (std::size_t r = layout.days; r >= 1; --r) {
    out.push_back(inst.features[layout.day_index(r, kVolumeField)]);
  }
  return out;
}

inline std::vector<double> slot_volumes(const Instance& inst, const Layout& layout) {
  std::vector<double> out;
  for (std::size_t r = layout.slots; r >= 1; --r) {
    out.push_back(inst.features[layout.slot_index(r, kVolumeField)]);
  }
  return out;
}

inline double baseline_predict(const BaselineSpec& spec, const Instance& inst,
                               const Layout& layout = Layout::volume()) {
  spec.validate();
  if (inst.features.size() != layout.dim()) {
    throw ShapeError("instance does not match the layout");
  }
  switch (spec.kind) {
    case BaselineKind::NaiveYesterday:
      return inst.features[layout.day_index(1, kVolumeField)];
    case BaselineKind::NaiveLastSlot:
      return inst.features[layout.slot_index(1, kVolumeField)];
    case BaselineKind::Sma20Day:
      return sma(day_volumes(inst, layout));
    case BaselineKind::Sma12Slot:
      return sma(slot_volumes(inst, layout));
    case BaselineKind::Ema20Day:
      return ema(day_volumes(inst, layout), spec.rho);
    case BaselineKind::Ema12Slot:
      return ema(slot_volumes(inst, layout), spec.rho);
    case BaselineKind::Combined:
      return 0.5 * (sma(day_volumes(inst, layout)) + sma(slot_volumes(inst, layout)));
  }
  return 0.0;
}

inline MetricsReport evaluate(const BaselineSpec& spec, const Dataset& data) {
  return evaluate_with([&](const Instance& inst) { return baseline_predict(spec, inst, data.layout); },
                  data.instances);
}

// Every baseline is linear in its input window; this returns the equivalent
// linear model so it can be attacked through its inputs.
inline Model baseline_as_linear(const BaselineSpec& spec,
                                const Layout& layout = Layout::volume()) {
  spec.validate();
  std::vector<double> theta(layout.dim() + 1, 0.0);
  const auto ema_weights = [&](std::size_t n, auto index_of_rank) {
    // Weight of rank r (1 = newest) after the recurrence over n values.
    for (std::size_t r = 1; r <= n; ++r) {
      const double tail = std::pow(1.0 - spec.rho, static_cast<double>(r - 1));
      theta[index_of_rank(r)] = (r == n) ? tail : spec.rho * tail;
    }
  };
  const auto sma_weights = [&](std::size_t n, auto index_of_rank, double w) {
    for (std::size_t r = 1; r <= n; ++r) theta[index_of_rank(r)] += w / static_cast<double>(n);
  };
  const auto day = [&](std::size_t r) { return layout.day_index(r, kVolumeField); };
  const auto slot = [&](std::size_t r) { return layout.slot_index(r, kVolumeField); };
  switch (spec.kind) {
    case BaselineKind::NaiveYesterday:
      theta[day(1)] = 1.0;
      break;
    case BaselineKind::NaiveLastSlot:
      theta[slot(1)] = 1.0;
      break;
    case BaselineKind::Sma20Day:
      sma_weights(layout.days, day, 1.0);
      break;
    case BaselineKind::Sma12Slot:
      sma_weights(layout.slots, slot, 1.0);
      break;
    case BaselineKind::Ema20Day:
      ema_weights(layout.days, day);
      break;
    case BaselineKind::Ema12Slot:
      ema_weights(layout.slots, slot);
      break;
    case BaselineKind::Combined:
      sma_weights(layout.days, day, 0.5);
      sma_weights(layout.slots, slot, 0.5);
      break;
  }
  return Model(ArchDescriptor::linear(layout.dim()), std::move(theta));
}

}  // namespace asat

#endif  // ASAT_BASELINES_HPP_
