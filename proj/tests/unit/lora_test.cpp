// Copyright 2026 The crisistune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crisistune/lora.hpp"

namespace crisistune {
namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

TEST(Lora, ZeroBIsFrozenForward) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const std::size_t d_in = 2 + rng() % 20, d_out = 2 + rng() % 20;
    const std::size_t r = 1 + rng() % (std::min(d_in, d_out) - 1);
    Matrix w = Matrix::gaussian(d_out, d_in, 1.0, rng());
    LoraLayer layer(w, r, rng());
    const auto x = random_vec(rng, d_in);
    EXPECT_EQ(layer.forward(x), matvec(w, x));
  }
}

TEST(Lora, IdentityAtFullRank) {
  const std::size_t d = 5;
  LoraLayer layer(Matrix(d, d), Matrix::identity(d), Matrix::identity(d), RankPolicy::kAllowFullRank);
  const std::vector<double> x{1.5, -2.0, 0.25, 3.0, -0.5};
  const auto y = layer.forward(x);
  for (std::size_t i = 0; i < d; ++i) EXPECT_DOUBLE_EQ(y[i], x[i]);
  EXPECT_THROW(LoraLayer(Matrix(d, d), Matrix::identity(d), Matrix::identity(d)),
               std::invalid_argument);
}

TEST(Lora, HandMultipliedForward) {
  // W 4x3, A 2x3, B 4x2.
  Matrix w(4, 3, {1, 0, 2, -1, 3, 1, 0, 0, 1, 2, -2, 0});
  Matrix a(2, 3, {1, 1, 0, 0, -1, 2});
  Matrix b(4, 2, {1, 0, 0, 1, 2, -1, 0.5, 0.5});
  LoraLayer layer(w, a, b);
  const std::vector<double> x{1, 2, 3};
  // W x = (7, 8, 3, -2); A x = (3, 4); B A x = (3, 4, 2, 3.5).
  const std::vector<double> want{10, 12, 5, 1.5};
  EXPECT_EQ(layer.forward(x), want);
  const Matrix eff = layer.effective_weight();
  EXPECT_EQ(matvec(eff, x), want);
}

TEST(Lora, ParamCount) {
  const auto small = param_count(3, 4, 2);
  EXPECT_EQ(small.trainable, 14u);
  EXPECT_EQ(small.full, 12u);
  const auto big = param_count(4096, 4096, 8);
  EXPECT_EQ(big.trainable, 65536u);
  EXPECT_EQ(big.full, 16777216u);
  EXPECT_DOUBLE_EQ(big.ratio, 1.0 / 256.0);
  for (std::uint64_t d : {1u, 7u, 64u, 1000u}) {
    EXPECT_EQ(param_count(d, d, d).trainable, 2 * d * d);
  }
  EXPECT_THROW(param_count(0, 4, 2), std::invalid_argument);
  LoraLayer layer(Matrix(4, 3), 2, 1);
  EXPECT_EQ(layer.trainable_parameters(), 14u);
}

TEST(Lora, ForwardIsLinear) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    LoraLayer layer(Matrix::gaussian(6, 8, 1.0, rng()), Matrix::gaussian(3, 8, 1.0, rng()),
                    Matrix::gaussian(6, 3, 1.0, rng()));
    const auto x = random_vec(rng, 8), y = random_vec(rng, 8);
    const double a = std::normal_distribution<double>(0, 2)(rng);
    const double b = std::normal_distribution<double>(0, 2)(rng);
    std::vector<double> mix(8);
    for (std::size_t k = 0; k < 8; ++k) mix[k] = a * x[k] + b * y[k];
    const auto fm = layer.forward(mix), fx = layer.forward(x), fy = layer.forward(y);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(fm[k], a * fx[k] + b * fy[k], 1e-9);
  }
}

TEST(Lora, ShapeErrors) {
  LoraLayer layer(Matrix(4, 3), 2, 1);
  EXPECT_THROW(layer.forward(std::vector<double>(4)), std::invalid_argument);
  EXPECT_THROW(LoraLayer(Matrix(4, 3), Matrix(2, 4), Matrix(4, 2)), std::invalid_argument);
  EXPECT_THROW(LoraLayer(Matrix(4, 3), Matrix(2, 3), Matrix(3, 2)), std::invalid_argument);
  EXPECT_THROW(LoraLayer(Matrix(4, 3), 3, 1), std::invalid_argument);
  EXPECT_THROW(LoraLayer(Matrix(4, 3), 0, 1), std::invalid_argument);
}

TEST(LoraTraining, FrozenWeightAndLossDrop) {
  const ToyProblem toy = make_toy_problem(1);
  LoraLayer layer(toy.w, 8, 1);
  const Matrix w_before = layer.w();
  const auto losses = train_toy(layer, toy.dataset, {});
  ASSERT_EQ(losses.size(), 201u);
  EXPECT_EQ(layer.w(), w_before);
  EXPECT_LT(losses.back(), 0.5 * losses.front());
}

TEST(LoraTraining, ZeroLearningRateKeepsLoss) {
  const ToyProblem toy = make_toy_problem(3);
  LoraLayer layer(toy.w, 8, 3);
  TrainConfig c;
  c.learning_rate = 0.0;
  c.steps = 10;
  const auto losses = train_toy(layer, toy.dataset, c);
  for (double l : losses) EXPECT_NEAR(l, losses.front(), 1e-12);
}

TEST(LoraTraining, SameSeedSameTrajectory) {
  const ToyProblem toy = make_toy_problem(4);
  TrainConfig c;
  c.steps = 30;
  LoraLayer l1(toy.w, 8, 9), l2(toy.w, 8, 9);
  EXPECT_EQ(train_toy(l1, toy.dataset, c), train_toy(l2, toy.dataset, c));
  EXPECT_EQ(l1.a(), l2.a());
  EXPECT_EQ(l1.b(), l2.b());
}

TEST(LoraTraining, ConfigValidation) {
  TrainConfig c;
  EXPECT_NO_THROW(validate(c));
  c.rank = 12;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.steps = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.learning_rate = -1;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.learning_rate = std::nan("");
  EXPECT_THROW(validate(c), std::invalid_argument);
  const ToyProblem toy = make_toy_problem(1);
  LoraLayer layer(toy.w, 4, 1);
  EXPECT_THROW(train_toy(layer, toy.dataset, {}), std::invalid_argument);
}

TEST(LoraGradients, MatchFiniteDifferences) {
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto c = make_grad_check_case(seed);
    const auto rep = grad_check(c.layer, c.sample);
    EXPECT_LT(rep.max_relative_error, 1e-5) << "seed " << seed;
    EXPECT_EQ(rep.entries_checked, 3u * 8 + 6u * 3);
    worst = std::max(worst, rep.max_relative_error);
  }
  RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(LoraGradients, ZeroInputGivesZeroDA) {
  auto c = make_grad_check_case(5);
  c.sample.x.assign(c.sample.x.size(), 0.0);
  LoraGradients g;
  loss_and_gradients(c.layer, std::vector{c.sample}, g);
  for (double v : g.d_a.data()) EXPECT_EQ(v, 0.0);
  for (double v : g.d_b.data()) EXPECT_EQ(v, 0.0);
}

TEST(LoraGradients, DuplicatedSampleSameMeanGradient) {
  const auto c = make_grad_check_case(6);
  LoraGradients one, two;
  const double l1 = loss_and_gradients(c.layer, std::vector{c.sample}, one);
  const double l2 = loss_and_gradients(c.layer, std::vector{c.sample, c.sample}, two);
  EXPECT_NEAR(l1, l2, 1e-15);
  for (std::size_t i = 0; i < one.d_a.data().size(); ++i) {
    EXPECT_NEAR(one.d_a.data()[i], two.d_a.data()[i], 1e-15);
  }
  for (std::size_t i = 0; i < one.d_b.data().size(); ++i) {
    EXPECT_NEAR(one.d_b.data()[i], two.d_b.data()[i], 1e-15);
  }
}

TEST(LoraGradients, BadLabel) {
  auto c = make_grad_check_case(7);
  c.sample.label = 6;
  EXPECT_THROW(cross_entropy_loss(c.layer, std::vector{c.sample}), std::invalid_argument);
  EXPECT_THROW(cross_entropy_loss(c.layer, {}), std::invalid_argument);
}

TEST(AdaptationTarget, RoundTrip) {
  for (auto t : {AdaptationTarget::kQkvo, AdaptationTarget::kAllLinear}) {
    EXPECT_EQ(adaptation_target_from_string(to_string(t)), t);
  }
  EXPECT_FALSE(adaptation_target_from_string("everything"));
}

}  // namespace
}  // namespace crisistune
