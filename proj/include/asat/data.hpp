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

// Synthetic intraday volume series, flattening into fixed-layout instances
// with timestamp ranks, chronological/random splits, and CSV persistence.

#ifndef ASAT_DATA_HPP_
#define ASAT_DATA_HPP_

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asat/errors.hpp"
#include "asat/rng.hpp"

namespace asat {

inline constexpr std::array<std::string_view, 5> kFieldNames = {
    "open", "close", "high", "low", "vol"};
inline constexpr std::size_t kVolumeField = 4;

// Flattened feature layout: `slots` recent-slot positions followed by
// `days` same-slot history positions, each contributing `features` values.
struct Layout {
  std::size_t slots = 12;
  std::size_t days = 20;
  std::size_t features = 5;

  static Layout volume() { return Layout{}; }
  // Generic layout for plain regression data; every dimension is its own
  // position with a distinct rank.
  static Layout flat(std::size_t k) { return Layout{k, 0, 1}; }

  std::size_t dim() const { return (slots + days) * features; }
  int horizon() const { return static_cast<int>(std::max<std::size_t>({slots, days, 1})); }
  bool is_slot(std::size_t i) const { return i < slots * features; }

  // Rank of the timestamp behind dimension i (1 = nearest).
  int rank(std::size_t i) const {
    const std::size_t pos = i / features;
    return static_cast<int>(pos < slots ? pos + 1 : pos - slots + 1);
  }

  std::vector<int> ranks() const {
    std::vector<int> out(dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rank(i);
    return out;
  }

  std::string_view field_name(std::size_t i) const {
    return features == kFieldNames.size() ? kFieldNames[i % features]
                                          : std::string_view("x");
  }

  std::size_t slot_index(std::size_t rank, std::size_t field) const {
    return (rank - 1) * features + field;
  }
  std::size_t day_index(std::size_t rank, std::size_t field) const {
    return (slots + rank - 1) * features + field;
  }

  std::string column_name(std::size_t i) const {
    return std::string(is_slot(i) ? "slot" : "day") + std::to_string(rank(i)) +
           "_" + std::string(field_name(i));
  }

  friend bool operator==(const Layout&, const Layout&) = default;
};

struct Instance {
  std::vector<double> features;
  double target = 0.0;
  double x_last = 0.0;  // log volume of the nearest slot
  int day = 0;
  int slot = 0;
};

struct Dataset {
  Layout layout;
  std::vector<Instance> instances;

  std::size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }
};

struct SplitDataset {
  Dataset train;
  Dataset dev;
  Dataset test;
};

// ---------------------------------------------------------------------------
// Synthetic generator

struct GeneratorParams {
  int n_days = 120;
  int slots_per_day = 16;
  double base_log_volume = 9.0;
  double seasonal_amplitude = 0.8;  // U-shape depth over the session
  double day_ar = 0.6;              // AR(1) coefficient of the day level
  double day_noise = 0.2;
  double slot_ar = 0.5;  // AR(1) coefficient of the slot component
  double slot_noise = 0.2;
  double idio_noise = 0.3;  // i.i.d. per-slot noise
  double base_log_price = 4.6;
  double price_volatility = 0.004;
  double range_scale = 0.002;
  double missing_rate = 0.0;

  void validate() const {
    if (n_days < 25) {
      throw ConfigError("n_days must be >= 25 (20-day history plus targets)");
    }
    if (slots_per_day < 13) throw ConfigError("slots_per_day must be >= 13");
    if (std::abs(day_ar) >= 1.0 || std::abs(slot_ar) >= 1.0) {
      throw ConfigError("AR coefficients must lie in (-1, 1)");
    }
    if (day_noise < 0 || slot_noise < 0 || idio_noise < 0 ||
        price_volatility < 0 || range_scale < 0) {
      throw ConfigError("noise amplitudes must be >= 0");
    }
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) {
      throw ConfigError("missing_rate must lie in [0, 1)");
    }
  }
};

// Raw (not log) bars indexed by day * slots + slot. Missing bars are NaN.
struct RawSeries {
  int days = 0;
  int slots = 0;
  std::vector<double> open, close, high, low, volume;

  std::size_t at(int d, int s) const {
    return static_cast<std::size_t>(d) * static_cast<std::size_t>(slots) +
           static_cast<std::size_t>(s);
  }
};

inline RawSeries generate_synthetic(const GeneratorParams& params,
                                    std::uint64_t seed) {
  params.validate();
  const int D = params.n_days;
  const int S = params.slots_per_day;
  const std::size_t n = static_cast<std::size_t>(D) * static_cast<std::size_t>(S);
  RawSeries raw;
  raw.days = D;
  raw.slots = S;
  raw.open.resize(n);
  raw.close.resize(n);
  raw.high.resize(n);
  raw.low.resize(n);
  raw.volume.resize(n);

  const SplitMix64 root(seed);
  SplitMix64 day_rng = root.split(1);
  SplitMix64 slot_rng = root.split(2);
  SplitMix64 idio_rng = root.split(3);
  SplitMix64 price_rng = root.split(4);
  SplitMix64 gap_rng = root.split(5);

  double day_level = 0.0;
  double slot_level = 0.0;
  double log_price = params.base_log_price;
  for (int d = 0; d < D; ++d) {
    day_level = params.day_ar * day_level + params.day_noise * day_rng.normal();
    for (int s = 0; s < S; ++s) {
      const double u = 2.0 * s / static_cast<double>(S - 1) - 1.0;
      const double seasonal = params.seasonal_amplitude * u * u;
      slot_level = params.slot_ar * slot_level + params.slot_noise * slot_rng.normal();
      const double log_vol = params.base_log_volume + seasonal + day_level +
                             slot_level + params.idio_noise * idio_rng.normal();

      const double open = log_price;
      const double close = open + params.price_volatility * price_rng.normal();
      const double hi = std::max(open, close) +
                        params.range_scale * std::abs(price_rng.normal());
      const double lo = std::min(open, close) -
                        params.range_scale * std::abs(price_rng.normal());
      log_price = close;

      const std::size_t i = raw.at(d, s);
      raw.open[i] = std::exp(open);
      raw.close[i] = std::exp(close);
      raw.high[i] = std::exp(hi);
      raw.low[i] = std::exp(lo);
      raw.volume[i] = std::exp(log_vol);
      if (params.missing_rate > 0.0 && gap_rng.uniform() < params.missing_rate) {
        raw.volume[i] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }
  return raw;
}

struct BuildResult {
  std::vector<Instance> instances;  // chronological order
  std::size_t skipped = 0;          // targets lacking history or with gaps
};

// Flattens the raw series into instances. For target (d, s) the slot block is
// the 12 preceding slots (crossing day boundaries unless `same_day_slots`)
// and the day block is slot s of days d-1 .. d-20. Values are natural logs;
// volumes are floored at 1 first.
inline BuildResult build_instances(const RawSeries& raw,
                                   bool same_day_slots = false,
                                   const Layout& layout = Layout::volume()) {
  if (layout.features != kFieldNames.size()) {
    throw ConfigError("build_instances needs the 5-field bar layout");
  }
  const auto log_bar = [&](std::size_t i, std::span<double> out) {
    out[0] = std::log(raw.open[i]);
    out[1] = std::log(raw.close[i]);
    out[2] = std::log(raw.high[i]);
    out[3] = std::log(raw.low[i]);
    out[4] = std::log(std::max(raw.volume[i], 1.0));
    return std::all_of(out.begin(), out.end(), [](double v) { return std::isfinite(v); }) &&
           !std::isnan(raw.volume[i]);
  };
  const long slots_needed = static_cast<long>(layout.slots);
  const long days_needed = static_cast<long>(layout.days);

  BuildResult result;
  for (int d = 0; d < raw.days; ++d) {
    for (int s = 0; s < raw.slots; ++s) {
      const long t = static_cast<long>(d) * raw.slots + s;
      const bool enough_days = d >= days_needed;
      const bool enough_slots = same_day_slots ? s >= slots_needed : t >= slots_needed;
      if (!enough_days || !enough_slots) {
        ++result.skipped;
        continue;
      }
      Instance inst;
      inst.features.assign(layout.dim(), 0.0);
      inst.day = d;
      inst.slot = s;
      bool ok = true;
      std::span<double> f(inst.features);
      for (std::size_t r = 1; r <= layout.slots && ok; ++r) {
        const auto src = static_cast<std::size_t>(t - static_cast<long>(r));
        ok = log_bar(src, f.subspan(layout.slot_index(r, 0), layout.features));
      }
      for (std::size_t r = 1; r <= layout.days && ok; ++r) {
        const std::size_t src = raw.at(d - static_cast<int>(r), s);
        ok = log_bar(src, f.subspan(layout.day_index(r, 0), layout.features));
      }
      const double v = raw.volume[raw.at(d, s)];
      if (!ok || std::isnan(v)) {
        ++result.skipped;
        continue;
      }
      inst.target = std::log(std::max(v, 1.0));
      inst.x_last = inst.features[layout.slot_index(1, kVolumeField)];
      result.instances.push_back(std::move(inst));
    }
  }
  return result;
}

// The final `test_fraction` of the (chronologically ordered) instances is the
// test split; the remainder is shuffled by `seed` into train:dev = 3:1.
inline SplitDataset split(std::vector<Instance> instances, const Layout& layout,
                          std::uint64_t seed, double test_fraction = 2.0 / 14.0) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  const std::size_t n = instances.size();
  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * test_fraction));
  if (n < 8 || n_test == 0 || n - n_test < 4) {
    throw ConfigError("too few instances to split (" + std::to_string(n) + ")");
  }
  SplitDataset out;
  out.train.layout = out.dev.layout = out.test.layout = layout;
  const std::size_t pool = n - n_test;
  out.test.instances.assign(std::make_move_iterator(instances.begin() + static_cast<std::ptrdiff_t>(pool)),
                            std::make_move_iterator(instances.end()));
  std::vector<std::size_t> order(pool);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  shuffle(std::span<std::size_t>(order), rng);
  const std::size_t n_dev = pool / 4;
  for (std::size_t j = 0; j < pool; ++j) {
    auto& target = j < pool - n_dev ? out.train.instances : out.dev.instances;
    target.push_back(std::move(instances[order[j]]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

inline std::vector<std::string> csv_header(const Layout& layout) {
  std::vector<std::string> cols;
  for (std::size_t i = 0; i < layout.dim(); ++i) cols.push_back(layout.column_name(i));
  for (const char* extra : {"target", "x_last", "day", "slot"}) cols.emplace_back(extra);
  return cols;
}

inline void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

// `comment`, when non-empty, is written as a leading `# ...` line.
inline void save_csv(const Dataset& data, const std::string& path,
                     const std::string& comment = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  std::string text;
  if (!comment.empty()) text += "# " + comment + "\n";
  const auto header = csv_header(data.layout);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) text += ',';
    text += header[c];
  }
  text += '\n';
  for (const Instance& inst : data.instances) {
    for (double v : inst.features) {
      append_double(text, v);
      text += ',';
    }
    append_double(text, inst.target);
    text += ',';
    append_double(text, inst.x_last);
    text += ',' + std::to_string(inst.day) + ',' + std::to_string(inst.slot) + '\n';
  }
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    cells.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

inline Dataset load_csv(const std::string& path,
                        const Layout& layout = Layout::volume()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  Dataset data;
  data.layout = layout;
  const auto header = csv_header(layout);
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_commas(line);
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    if (!seen_header) {
      if (cells.size() != header.size() ||
          !std::equal(cells.begin(), cells.end(), header.begin())) {
        throw DataError(where + "header does not match the expected schema");
      }
      seen_header = true;
      continue;
    }
    if (cells.size() != header.size()) {
      throw DataError(where + "expected " + std::to_string(header.size()) +
                      " columns, found " + std::to_string(cells.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = cells[c];
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), values[c]);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw DataError(where + "cannot parse column '" + header[c] + "'");
      }
    }
    Instance inst;
    const std::size_t k = layout.dim();
    inst.features.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k));
    inst.target = values[k];
    inst.x_last = values[k + 1];
    inst.day = static_cast<int>(values[k + 2]);
    inst.slot = static_cast<int>(values[k + 3]);
    data.instances.push_back(std::move(inst));
  }
  if (!seen_header) throw DataError(path + ": missing header row");
  return data;
}

}  // namespace asat

#endif  // ASAT_DATA_HPP_
