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

#include "asat/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace asat {
namespace {

using ::asat::testing::linear_dataset;
using ::asat::testing::random_model;
using ::asat::testing::random_vector;

std::vector<std::size_t> argsort(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  return idx;
}

TEST(SensitivityTest, ConstantModelIsInsensitive) {
  const Model m(ArchDescriptor::linear(3), {0, 0, 0, 1.5});
  const Dataset d = linear_dataset({1, 2, 3}, 0, 10, 1);
  for (double v : full_report(m, d, 0.5).per_dim) EXPECT_EQ(v, 0.0);
}

TEST(SensitivityTest, LinearClosedForm) {
  // Moving x_i by t changes the residual r by theta_i t; the best t is
  // eps * sgn(r theta_i), giving 2 |r theta_i| eps + theta_i^2 eps^2.
  SplitMix64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Model m = random_model(ArchDescriptor::linear(4), rng, 2.0);
    Instance inst{random_vector(rng, 4), rng.uniform(-1, 1), 0, 0, 0};
    const double r = m.predict(inst.features) - inst.target;
    const double eps = rng.uniform(0.01, 1.0);
    const std::vector<Instance> one = {inst};
    for (std::size_t i = 0; i < 4; ++i) {
      const double th = m.theta()[i];
      const double expected = 2 * std::abs(r * th) * eps + th * th * eps * eps;
      EXPECT_NEAR(dim_sensitivity(m, one, i, eps), expected, 1e-12 * (1 + expected));
    }
  }
}

TEST(SensitivityTest, ZeroCoefficientDimensionIsInsensitive) {
  const Model m(ArchDescriptor::linear(3), {0.5, 0.0, -1.0, 0.2});
  const Dataset d = linear_dataset({1, 1, 1}, 0, 20, 3);
  EXPECT_EQ(dim_sensitivity(m, d.instances, 1, 0.3), 0.0);
  EXPECT_GT(dim_sensitivity(m, d.instances, 0, 0.3), 0.0);
}

TEST(SensitivityTest, LinearOrderingFollowsCoefficientMagnitude) {
  SplitMix64 rng(4);
  const std::size_t k = 12;
  std::vector<double> theta(k + 1, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    theta[i] = rng.uniform(0.1, 2.0) * (rng.uniform() < 0.5 ? -1 : 1);
  }
  const Model m(ArchDescriptor::linear(k), theta);
  const Dataset d = linear_dataset(std::vector<double>(k, 0.3), 0.1, 50, 5, 0.5);
  const auto report = full_report(m, d, 1e-3);
  std::vector<double> mag(k);
  for (std::size_t i = 0; i < k; ++i) mag[i] = std::abs(theta[i]);
  EXPECT_EQ(argsort(report.per_dim), argsort(mag));
}

TEST(SensitivityTest, DatasetReportIsMeanOfInstanceReports) {
  SplitMix64 rng(6);
  const Model m = random_model(ArchDescriptor::mlp(5, {4}), rng);
  const Dataset d = linear_dataset({0.1, 0.2, 0.3, 0.4, 0.5}, 0, 17, 7, 0.2);
  const auto all = full_report(m, d, 0.2, 9, 3);
  std::vector<double> sum(5, 0.0);
  for (std::size_t n = 0; n < d.size(); ++n) {
    const auto one = instance_report(m, d, n, 0.2);
    EXPECT_EQ(one.scope, ProbeScope::SingleInstance);
    for (std::size_t i = 0; i < 5; ++i) sum[i] += one.per_dim[i];
  }
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(all.per_dim[i], sum[i] / static_cast<double>(d.size()), 1e-12);
  }
}

TEST(SensitivityTest, NonnegativeAndMonotoneInRadius) {
  SplitMix64 rng(8);
  const Dataset d = linear_dataset({0.1, -0.2, 0.3}, 0, 12, 9, 0.2);
  for (const auto& arch : {ArchDescriptor::linear(3), ArchDescriptor::mlp(3, {4}),
                           ArchDescriptor::attn(1, 3, 3)}) {
    const Model m = random_model(arch, rng);
    std::vector<double> prev(3, 0.0);
    for (double eps : {0.05, 0.1, 0.2, 0.4}) {
      // Growth in eps is exact only when the loss is convex along each axis.
      const auto r = full_report(m, d, eps);
      for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_GE(r.per_dim[i], 0.0);
        if (arch.family == Family::Linear) {
          EXPECT_GE(r.per_dim[i], prev[i] - 1e-12);
        }
      }
      prev = r.per_dim;
    }
  }
}

TEST(SensitivityTest, GridResolutionIrrelevantForLinearModels) {
  SplitMix64 rng(10);
  const Model m = random_model(ArchDescriptor::linear(4), rng);
  const Dataset d = linear_dataset({0.1, 0.2, 0.3, 0.4}, 0, 15, 11, 0.3);
  const auto coarse = full_report(m, d, 0.5, 9);
  const auto fine = full_report(m, d, 0.5, 33);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(coarse.per_dim[i], fine.per_dim[i], 1e-12);
}

TEST(SensitivityTest, RejectsBadArguments) {
  const Model m(ArchDescriptor::linear(2), {1, 1, 0});
  const Dataset d = linear_dataset({1, 1}, 0, 4, 12);
  EXPECT_THROW(dim_sensitivity(m, d.instances, 2, 0.1), RangeError);
  EXPECT_THROW(instance_report(m, d, 4, 0.1), RangeError);
  EXPECT_THROW(full_report(m, d, 0.0), ConfigError);
  EXPECT_THROW(full_report(m, d, 0.1, 8), ConfigError);
  EXPECT_THROW(full_report(m, Dataset{d.layout, {}}, 0.1), EmptyInputError);
}

TEST(SensitivityTest, VolumeLayoutCsvHasOneRowPerDimension) {
  const Layout layout = Layout::volume();
  Dataset d{layout, {}};
  SplitMix64 rng(13);
  for (int n = 0; n < 3; ++n) {
    d.instances.push_back(Instance{random_vector(rng, layout.dim()), 0.5, 0, n, 0});
  }
  const Model m = random_model(ArchDescriptor::linear(layout.dim()), rng, 0.05);
  const auto report = full_report(m, d, 1.0);
  ::asat::testing::TempDir dir("probe_csv");
  save_sensitivity_csv(report, dir.str("p.csv"));
  const std::string text = ::asat::testing::read_file(dir.str("p.csv"));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 161);
  EXPECT_NE(text.find("\n0,slot,1,open,"), std::string::npos);
  EXPECT_NE(text.find("\n159,day,20,vol,"), std::string::npos);
}

}  // namespace
}  // namespace asat
