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

#include "asat/autodiff.hpp"

#include <cmath>
#include <vector>

#include "asat/models.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace asat {
namespace {

using ::asat::testing::finite_differences;
using ::asat::testing::gradient_close;
using ::asat::testing::random_model;
using ::asat::testing::random_vector;

Model linear(std::vector<double> w, double b) {
  w.push_back(b);
  const std::size_t k = w.size() - 1;
  return Model(ArchDescriptor::linear(k), std::move(w));
}

TEST(ForwardLossTest, Examples) {
  EXPECT_EQ(forward_loss(linear({1, 1}, 0), std::vector<double>{1, 2}, 3).loss, 0.0);
  EXPECT_EQ(forward_loss(linear({2, 0}, 0), std::vector<double>{1, 1}, 0).loss, 4.0);
  const Model m = linear({0.3, -0.7}, 0.1);
  const std::vector<double> x = {0.4, 0.9};
  EXPECT_EQ(forward_loss(m, x, m.predict(x)).loss, 0.0);
}

TEST(ForwardLossTest, DimensionMismatchThrows) {
  EXPECT_THROW(forward_loss(linear({1, 1}, 0), std::vector<double>{1}, 0), ShapeError);
}

TEST(BackwardTest, LinearChainRule) {
  const auto g = backward(forward_loss(linear({2, 0}, 0), std::vector<double>{1, 1}, 0));
  ASSERT_EQ(g.grad_input.size(), 2u);
  EXPECT_DOUBLE_EQ(g.grad_input[0], 8.0);
  EXPECT_DOUBLE_EQ(g.grad_input[1], 0.0);
  // d/dtheta = 2 r x, d/db = 2 r
  EXPECT_DOUBLE_EQ(g.grad_params[0], 4.0);
  EXPECT_DOUBLE_EQ(g.grad_params[1], 4.0);
  EXPECT_DOUBLE_EQ(g.grad_params[2], 4.0);
}

TEST(BackwardTest, ZeroResidualZeroGradient) {
  const auto g = backward(forward_loss(linear({1, 1}, 0), std::vector<double>{1, 2}, 3));
  for (double v : g.grad_input) EXPECT_EQ(v, 0.0);
  for (double v : g.grad_params) EXPECT_EQ(v, 0.0);
}

TEST(BackwardTest, RepeatedSweepsAreIdentical) {
  SplitMix64 rng(3);
  const Model m = random_model(ArchDescriptor::attn(4, 3, 5), rng);
  const auto recorded = forward_loss(m, random_vector(rng, 12), 0.3);
  const auto a = backward(recorded);
  const auto b = backward(recorded);
  EXPECT_EQ(a.grad_input, b.grad_input);
  EXPECT_EQ(a.grad_params, b.grad_params);
}

TEST(TapeTest, PrimitiveGradientsMatchFiniteDifferences) {
  // loss = mean(square(softmax_rows(A B^T) * C + broadcast - D)) through
  // every primitive, checked against central differences on A.
  SplitMix64 rng(11);
  const Matrix A(2, 3, random_vector(rng, 6));
  const Matrix B(4, 3, random_vector(rng, 12));
  const Matrix C(2, 4, random_vector(rng, 8));
  const Matrix row(1, 4, random_vector(rng, 4));
  auto run = [&](const Matrix& a, std::vector<double>* grad) {
    Tape t;
    const auto na = t.input(a);
    const auto nb = t.constant(B);
    const auto s = t.softmax_rows(t.scale(t.matmul_nt(na, nb), 0.7));
    const auto m = t.mul(s, t.constant(C));
    const auto h = t.tanh(t.add_row_broadcast(m, t.constant(row)));
    const auto r = t.reshape(h, 4, 2);
    const auto top = t.slice_row(r, 1);
    const auto cat = t.concat_rows(top, t.slice_row(r, 3));
    const auto sq = t.square(t.sub(t.add(cat, cat), t.constant(Matrix(2, 2, 0.1))));
    const auto root = t.mean(t.matmul(sq, t.constant(Matrix(2, 1, 1.0))));
    if (grad) *grad = t.gradients(root).grad_input;
    return t.value(root).data[0];
  };
  std::vector<double> analytic;
  run(A, &analytic);
  for (std::size_t i = 0; i < A.size(); ++i) {
    Matrix up = A, down = A;
    up.data[i] += 1e-6;
    down.data[i] -= 1e-6;
    const double numeric = (run(up, nullptr) - run(down, nullptr)) / 2e-6;
    EXPECT_NEAR(analytic[i], numeric, 1e-7) << "entry " << i;
  }
}

TEST(TapeTest, NonScalarRootRejected) {
  Tape t;
  const auto x = t.input(Matrix(1, 2, 1.0));
  EXPECT_THROW(t.gradients(x), ShapeError);
}

// Property: analytic gradients match central differences for every family.
class FamilyGradientTest : public ::testing::TestWithParam<int> {};

ArchDescriptor arch_for(int family) {
  switch (family) {
    case 0:
      return ArchDescriptor::linear(7);
    case 1:
      return ArchDescriptor::mlp(6, {5, 3});
    default:
      return ArchDescriptor::attn(4, 3, 4);
  }
}

TEST_P(FamilyGradientTest, MatchesFiniteDifferences) {
  SplitMix64 rng(100 + GetParam());
  const ArchDescriptor arch = arch_for(GetParam());
  for (int trial = 0; trial < 20; ++trial) {
    const Model m = random_model(arch, rng, 0.8);
    const auto x = random_vector(rng, arch.input_dim, -1.5, 1.5);
    const double y = rng.uniform(-1, 1);
    const auto analytic = backward(forward_loss(m, x, y));
    const auto numeric = finite_differences(m, x, y);
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_TRUE(gradient_close(analytic.grad_input[i], numeric.grad_input[i]))
          << "input " << i << ": " << analytic.grad_input[i] << " vs " << numeric.grad_input[i];
    }
    for (std::size_t i = 0; i < m.theta().size(); ++i) {
      EXPECT_TRUE(gradient_close(analytic.grad_params[i], numeric.grad_params[i]))
          << "param " << i << ": " << analytic.grad_params[i] << " vs "
          << numeric.grad_params[i];
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllFamilies, FamilyGradientTest, ::testing::Values(0, 1, 2));

}  // namespace
}  // namespace asat
