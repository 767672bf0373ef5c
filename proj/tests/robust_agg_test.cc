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


#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "airfl/robust_agg.h"

namespace airfl {
namespace {

ClusterUpdate Active(std::initializer_list<double> g) {
  ClusterUpdate u;
  u.active = true;
  u.zeta = 1.0;
  u.g = Vec(static_cast<Eigen::Index>(g.size()));
  int i = 0;
  for (double x : g) u.g[i++] = x;
  return u;
}

TEST(CosineFilterTest, HandExample) {
  std::vector<ClusterUpdate> updates = {Active({1.0, 0.0}), Active({-1.0, 0.1}),
                                        ClusterUpdate{}, Active({1.0, 1.0})};
  const Vec g0 = (Vec(2) << 2.0, 0.0).finished();
  const FilterOutcome out = CosineFilter(updates, g0, 0.0);
  EXPECT_EQ(out.surviving, (IndexSet{0, 3}));
  EXPECT_FALSE(out.bypassed);
  EXPECT_DOUBLE_EQ(out.cosine[0], 1.0);
  EXPECT_TRUE(std::isnan(out.cosine[2]));
  EXPECT_NEAR(out.cosine[3], std::sqrt(0.5), 1e-15);
  EXPECT_LT(out.cosine[1], 0.0);
  EXPECT_EQ(CosineFilter(updates, g0, 0.8).surviving, (IndexSet{0}));
}

TEST(CosineFilterTest, BoundaryIsInclusive) {
  // Orthogonal update: cosine exactly 0 survives a threshold of 0.
  std::vector<ClusterUpdate> updates = {Active({0.0, 3.0}), Active({1.0, 0.0})};
  const Vec g0 = (Vec(2) << 1.0, 0.0).finished();
  EXPECT_EQ(CosineFilter(updates, g0, 0.0).surviving, (IndexSet{0, 1}));
  EXPECT_EQ(CosineFilter(updates, g0, 1.0).surviving, (IndexSet{1}));
}

TEST(CosineFilterTest, ZeroRootGradientBypasses) {
  std::vector<ClusterUpdate> updates = {Active({-1.0, 0.0}), ClusterUpdate{},
                                        Active({1.0, 0.0})};
  const FilterOutcome out = CosineFilter(updates, Vec::Zero(2), 0.5);
  EXPECT_TRUE(out.bypassed);
  EXPECT_EQ(out.surviving, (IndexSet{0, 2}));
}

TEST(CosineFilterTest, SurvivorsShrinkAsThresholdRises) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ClusterUpdate> updates;
    for (int c = 0; c < 8; ++c) {
      ClusterUpdate u;
      u.active = c % 5 != 4;
      u.g = Vec::NullaryExpr(5, [&] { return n(rng); });
      updates.push_back(u);
    }
    const Vec g0 = Vec::NullaryExpr(5, [&] { return n(rng); });
    std::size_t previous = 9;
    for (double t = -1.0; t <= 1.0; t += 0.1) {
      const auto s = CosineFilter(updates, g0, t).surviving;
      EXPECT_LE(s.size(), previous);
      previous = s.size();
    }
  }
}

TEST(AcceptAllTest, KeepsEveryActiveCluster) {
  std::vector<ClusterUpdate> updates = {Active({-1.0}), ClusterUpdate{}, Active({5.0})};
  EXPECT_EQ(AcceptAllActive(updates).surviving, (IndexSet{0, 2}));
}

TEST(GlobalUpdateTest, HandExample) {
  std::vector<ClusterUpdate> updates = {Active({1.0, 2.0}), Active({10.0, 10.0}),
                                        Active({-3.0, 1.0})};
  FilterOutcome keep;
  keep.surviving = {0, 2};
  const Vec w = (Vec(2) << 1.0, 1.0).finished();
  const Vec next = GlobalUpdate(w, keep, updates, 0.5);
  EXPECT_DOUBLE_EQ(next[0], 2.0);
  EXPECT_DOUBLE_EQ(next[1], -0.5);
  EXPECT_EQ(GlobalUpdate(w, FilterOutcome{}, updates, 0.5), w);
  EXPECT_THROW(GlobalUpdate(w, keep, updates, 0.0), ConfigError);
}

TEST(RootGradientTest, MatchesFiniteDifferences) {
  const Dataset root = MakeGaussianClassification(20, 3, 4, 2.0, 9);
  auto arch = std::make_shared<LinearSoftmax>(3, 4);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.3);
  Model m{arch, Vec::NullaryExpr(arch->dimension(), [&] { return n(rng); })};
  std::vector<int> rows(20);
  std::iota(rows.begin(), rows.end(), 0);
  const Vec fd = FiniteDifferenceGradient(*arch, m.w, root, rows, 1e-6);
  EXPECT_LT((RootGradient(m, root) - fd).norm(), 1e-7);
  EXPECT_THROW(RootGradient(m, root.Subset(std::vector<int>{})), ConfigError);
}

}  // namespace
}  // namespace airfl
