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

// Test-only helpers: random generators and a finite-difference oracle that
// evaluates models through Model::predict only.

#ifndef ASAT_TESTS_TEST_UTIL_HPP_
#define ASAT_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "asat.hpp"

namespace asat::testing {

inline std::vector<double> random_vector(SplitMix64& rng, std::size_t k, double lo = -1.0,
                                         double hi = 1.0) {
  std::vector<double> v(k);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline Model random_model(const ArchDescriptor& arch, SplitMix64& rng, double scale = 0.5) {
  std::vector<double> theta(parameter_count(arch));
  for (double& t : theta) t = rng.uniform(-scale, scale);
  return Model(arch, std::move(theta));
}

// Central differences of (f(x) - y)^2 with respect to x and theta.
struct FiniteDifferences {
  std::vector<double> grad_input;
  std::vector<double> grad_params;
};

inline FiniteDifferences finite_differences(const Model& model, std::vector<double> x, double y,
                                            double h = 1e-5) {
  FiniteDifferences out;
  const auto loss = [&](const Model& m, const std::vector<double>& in) {
    const double r = m.predict(in) - y;
    return r * r;
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double up = loss(model, x);
    x[i] = orig - h;
    const double down = loss(model, x);
    x[i] = orig;
    out.grad_input.push_back((up - down) / (2 * h));
  }
  std::vector<double> theta(model.theta().begin(), model.theta().end());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double orig = theta[i];
    theta[i] = orig + h;
    const double up = loss(Model(model.arch(), theta), x);
    theta[i] = orig - h;
    const double down = loss(Model(model.arch(), theta), x);
    theta[i] = orig;
    out.grad_params.push_back((up - down) / (2 * h));
  }
  return out;
}

inline bool gradient_close(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return std::abs(analytic - numeric) <= std::max(1e-4 * scale, 1e-7);
}

// Regression data y = w . x + b on a flat layout.
inline Dataset linear_dataset(const std::vector<double>& w, double b, std::size_t n,
                              std::uint64_t seed, double noise = 0.0) {
  SplitMix64 rng(seed);
  Dataset d;
  d.layout = Layout::flat(w.size());
  for (std::size_t i = 0; i < n; ++i) {
    Instance inst;
    inst.features = random_vector(rng, w.size());
    double y = b;
    for (std::size_t j = 0; j < w.size(); ++j) y += w[j] * inst.features[j];
    inst.target = y + noise * rng.normal();
    inst.x_last = inst.features[0];
    inst.day = static_cast<int>(i);
    d.instances.push_back(std::move(inst));
  }
  return d;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("asat_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& leaf = {}) const {
    return leaf.empty() ? path_.string() : (path_ / leaf).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace asat::testing

#endif  // ASAT_TESTS_TEST_UTIL_HPP_
