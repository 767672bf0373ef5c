// Copyright 2026 The airfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <memory>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "airfl/adversary.h"

namespace airfl {
namespace {

std::vector<Vec> SomeGradients(int count, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Vec> g;
  for (int k = 0; k < count; ++k) g.push_back(Vec::NullaryExpr(dim, [&] { return n(rng); }));
  return g;
}

TEST(RosterTest, MakeSortsAndFlags) {
  const AdversaryRoster r = MakeRoster(5, {3, 0});
  EXPECT_EQ(r.byzantine, (IndexSet{0, 3}));
  EXPECT_TRUE(r.is_byzantine(0));
  EXPECT_FALSE(r.is_byzantine(1));
  EXPECT_EQ(r.size(), 2);
  EXPECT_THROW(MakeRoster(5, {5}), ConfigError);
  EXPECT_THROW(MakeRoster(5, {1, 1}), ConfigError);
  EXPECT_THROW(MakeRoster(2, {0, 1}), ConfigError);
}

TEST(RosterTest, SampleIsUniformAndDistinct) {
  std::mt19937_64 rng(4);
  std::vector<int> hits(10, 0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const AdversaryRoster r = SampleRoster(rng, 10, 3);
    ASSERT_EQ(std::set<int>(r.byzantine.begin(), r.byzantine.end()).size(), 3u);
    for (int k : r.byzantine) hits[k]++;
  }
  // Each device is chosen with probability 0.3.
  const double se = std::sqrt(0.3 * 0.7 / trials);
  for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / trials, 0.3, 5 * se);
  EXPECT_EQ(SampleRoster(rng, 4, 0).size(), 0);
  EXPECT_THROW(SampleRoster(rng, 4, 4), ConfigError);
  EXPECT_THROW(SampleRoster(rng, 4, -1), ConfigError);
}

TEST(AttackTagTest, NamesRoundTrip) {
  for (AttackTag t : {AttackTag::kNone, AttackTag::kSignFlip, AttackTag::kGaussian,
                      AttackTag::kLabelFlip}) {
    EXPECT_EQ(ParseAttackTag(AttackTagName(t)), t);
  }
  EXPECT_THROW(ParseAttackTag("flip"), ConfigError);
}

TEST(AttackTest, NoneIsIdentity) {
  const auto g = SomeGradients(5, 4, 1);
  std::mt19937_64 rng(1);
  const auto out = ApplyAttack({.tag = AttackTag::kNone}, g, MakeRoster(5, {1, 2}), {}, rng);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(out[k], g[k]);
}

TEST(AttackTest, SignFlipHandExample) {
  std::vector<Vec> g(3, Vec(2));
  g[0] << 1.0, 2.0;
  g[1] << 100.0, 100.0;
  g[2] << 3.0, -1.0;
  std::mt19937_64 rng(1);
  const auto out =
      ApplyAttack({.tag = AttackTag::kSignFlip}, g, MakeRoster(3, {1}), {}, rng);
  EXPECT_EQ(out[1], (Vec(2) << -4.0, -1.0).finished());
  EXPECT_EQ(out[0], g[0]);
  EXPECT_EQ(out[2], g[2]);
}

TEST(AttackTest, GaussianMomentsAndHonestUntouched) {
  const int dim = 20000;
  const auto g = SomeGradients(4, dim, 2);
  std::mt19937_64 rng(3);
  AttackKind kind{.tag = AttackTag::kGaussian, .gaussian_mean = 0.7, .gaussian_std = 2.0};
  const auto out = ApplyAttack(kind, g, MakeRoster(4, {2}), {}, rng);
  const double mean = out[2].mean();
  const double var = (out[2].array() - mean).square().sum() / (dim - 1);
  EXPECT_NEAR(mean, 0.7, 5 * 2.0 / std::sqrt(dim));
  EXPECT_NEAR(var, 4.0, 5 * 4.0 * std::sqrt(2.0 / dim));
  for (int k : {0, 1, 3}) EXPECT_EQ(out[k], g[k]);
}

TEST(AttackTest, DeterministicForSameStream) {
  const auto g = SomeGradients(6, 5, 3);
  const AdversaryRoster r = MakeRoster(6, {0, 4});
  std::mt19937_64 a(9);
  std::mt19937_64 b(9);
  const auto x = ApplyAttack({.tag = AttackTag::kGaussian}, g, r, {}, a);
  const auto y = ApplyAttack({.tag = AttackTag::kGaussian}, g, r, {}, b);
  for (int k = 0; k < 6; ++k) EXPECT_EQ(x[k], y[k]);
}

TEST(AttackTest, LabelFlipNegatesLeastSquaresGradientAtOrigin) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Dataset> data(3);
  std::vector<Minibatch> batches;
  for (auto& d : data) {
    d.features = Mat::NullaryExpr(8, 3, [&] { return n(rng); });
    d.targets = Vec::NullaryExpr(8, [&] { return n(rng); });
    batches.push_back(FullBatch(8));
  }
  Model model{std::make_shared<LeastSquares>(3), Vec::Zero(3)};
  std::vector<Vec> g;
  for (int k = 0; k < 3; ++k) g.push_back(LocalGradient(model, batches[k], data[k]));
  AttackContext ctx{.model = &model, .datasets = data, .batches = batches};
  const auto out = ApplyAttack({.tag = AttackTag::kLabelFlip}, g, MakeRoster(3, {1}), ctx, rng);
  EXPECT_LT((out[1] + g[1]).norm(), 1e-12);
  EXPECT_EQ(out[0], g[0]);
  EXPECT_THROW(ApplyAttack({.tag = AttackTag::kLabelFlip}, g, MakeRoster(3, {1}), {}, rng),
               ConfigError);
}

TEST(AttackTest, LabelFlipOnClassifierUsesMirroredLabels) {
  const Dataset d = MakeGaussianClassification(30, 4, 5, 2.0, 6);
  Model model{std::make_shared<LinearSoftmax>(4, 5), Vec::Constant(25, 0.1)};
  std::vector<Dataset> data = {d, d};
  std::vector<Minibatch> batches = {FullBatch(30), FullBatch(30)};
  std::vector<Vec> g = {LocalGradient(model, batches[0], d), LocalGradient(model, batches[1], d)};
  std::mt19937_64 rng(1);
  AttackContext ctx{.model = &model, .datasets = data, .batches = batches};
  const auto out = ApplyAttack({.tag = AttackTag::kLabelFlip}, g, MakeRoster(2, {0}), ctx, rng);
  const Vec expected = LocalGradient(model, batches[0], FlipLabels(d));
  EXPECT_LT((out[0] - expected).norm(), 1e-14);
  EXPECT_GT((out[0] - g[0]).norm(), 1e-3);
}

}  // namespace
}  // namespace airfl
