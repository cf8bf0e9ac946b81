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

// Dimension-wise adversarial sensitivity: the expected largest loss increase
// reachable by moving a single input coordinate within [-eps, eps].

#ifndef ASAT_SENSITIVITY_HPP_
#define ASAT_SENSITIVITY_HPP_

#include <algorithm>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "asat/constraint_geometry.hpp"
#include "asat/data.hpp"
#include "asat/errors.hpp"
#include "asat/models.hpp"
#include "asat/parallel.hpp"

namespace asat {

enum class ProbeScope { Dataset, SingleInstance };

struct SensitivityReport {
  double epsilon = 0.0;
  std::vector<double> per_dim;
  ProbeScope scope = ProbeScope::Dataset;
  int grid_points = 9;
  Layout layout;
};

namespace detail {

inline void check_probe_args(double epsilon, int grid_points) {
  if (!(epsilon > 0.0)) throw ConfigError("probe epsilon must be > 0");
  if (grid_points < 3 || grid_points % 2 == 0) {
    throw ConfigError("probe grid_points must be odd and >= 3");
  }
}

// max over candidate offsets of L(x + t e_i) - L(x) for each listed dim.
// Candidates: the uniform grid on [-eps, eps] plus eps * sgn(dL/dx_i).
inline std::vector<double> instance_sensitivity(const Model& model,
                                                const Instance& inst,
                                                std::span<const std::size_t> dims,
                                                double epsilon, int grid_points) {
  const LossTape base = forward_loss(model, inst.features, inst.target);
  const GradientPair grads = backward(base);
  std::vector<double> shifted(inst.features);
  std::vector<double> out;
  out.reserve(dims.size());
  for (std::size_t i : dims) {
    const double original = shifted[i];
    double best = 0.0;
    auto probe = [&](double t) {
      shifted[i] = original + t;
      best = std::max(best, squared_loss(model, shifted, inst.target) - base.loss);
    };
    for (int j = 0; j < grid_points; ++j) {
      const double t = -epsilon + 2.0 * epsilon * j / static_cast<double>(grid_points - 1);
      if (t != 0.0) probe(t);
    }
    probe(epsilon * sign(grads.grad_input[i]));
    shifted[i] = original;
    out.push_back(best);
  }
  return out;
}

}  // namespace detail

// R_i(eps) averaged over `data` (a single instance is a one-element span).
inline double dim_sensitivity(const Model& model, std::span<const Instance> data,
                              std::size_t dim, double epsilon, int grid_points = 9) {
  detail::check_probe_args(epsilon, grid_points);
  if (data.empty()) throw EmptyInputError("sensitivity over an empty dataset");
  if (dim >= model.input_dim()) {
    throw RangeError("dimension index " + std::to_string(dim) + " out of range");
  }
  const std::size_t dims[] = {dim};
  double sum = 0.0;
  for (const Instance& inst : data) {
    sum += detail::instance_sensitivity(model, inst, dims, epsilon, grid_points)[0];
  }
  return sum / static_cast<double>(data.size());
}

inline SensitivityReport full_report(const Model& model, const Dataset& data,
                                     double epsilon, int grid_points = 9,
                                     std::size_t workers = 1) {
  detail::check_probe_args(epsilon, grid_points);
  if (data.empty()) throw EmptyInputError("sensitivity over an empty dataset");
  const std::size_t k = model.input_dim();
  if (data.layout.dim() != k) throw ShapeError("layout does not match the model");
  std::vector<std::size_t> dims(k);
  for (std::size_t i = 0; i < k; ++i) dims[i] = i;

  std::vector<std::vector<double>> rows(data.size());
  parallel_for(data.size(), workers, [&](std::size_t n) {
    rows[n] = detail::instance_sensitivity(model, data.instances[n], dims, epsilon,
                                           grid_points);
  });
  SensitivityReport report;
  report.epsilon = epsilon;
  report.grid_points = grid_points;
  report.layout = data.layout;
  report.scope = data.size() == 1 ? ProbeScope::SingleInstance : ProbeScope::Dataset;
  report.per_dim.assign(k, 0.0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < k; ++i) report.per_dim[i] += row[i];
  }
  for (double& v : report.per_dim) v /= static_cast<double>(data.size());
  return report;
}

inline SensitivityReport instance_report(const Model& model, const Dataset& data,
                                         std::size_t index, double epsilon,
                                         int grid_points = 9) {
  if (index >= data.size()) {
    throw RangeError("instance index " + std::to_string(index) + " out of range (" +
                     std::to_string(data.size()) + " instances)");
  }
  Dataset one{data.layout, {data.instances[index]}};
  SensitivityReport report = full_report(model, one, epsilon, grid_points);
  report.scope = ProbeScope::SingleInstance;
  return report;
}

// CSV `dim_index,block,rank,feature,sensitivity`.
inline void save_sensitivity_csv(const SensitivityReport& report,
                                 const std::string& path,
                                 const std::string& comment = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "dim_index,block,rank,feature,sensitivity\n";
  std::string line;
  for (std::size_t i = 0; i < report.per_dim.size(); ++i) {
    line = std::to_string(i) + ',' + (report.layout.is_slot(i) ? "slot" : "day") + ',' +
           std::to_string(report.layout.rank(i)) + ',' +
           std::string(report.layout.field_name(i)) + ',';
    append_double(line, report.per_dim[i]);
    out << line << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace asat

#endif  // ASAT_SENSITIVITY_HPP_
