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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "airfl/aircomp.h"

namespace airfl {
namespace {

struct Fixture {
  RoundChannel ch;
  ClusterPlan plan;
  std::vector<Vec> grads;
  PowerConfig pc{.p_max = 1e-3, .clip_norm = 2.0, .noise_power = 0.0};
};

// Six devices, two clusters of three. Device 4 is truncated.
Fixture SixDevices() {
  Fixture f;
  f.ch.h = {Complex(0.6, 0.8), Complex(-1.0, 0.0), Complex(0.0, 0.5),
            Complex(1.2, -0.5), Complex(0.05, 0.0), Complex(0.3, 0.4)};
  f.ch.beta = (Vec(6) << 0.5, 1.0, 2.0, 0.8, 1.0, 1.5).finished();
  f.ch.threshold = 0.2;
  for (int k = 0; k < 6; ++k) {
    if (f.ch.is_activated(k)) f.ch.activated.push_back(k);
  }
  f.plan.clusters = {{0, 1, 2}, {3, 4, 5}};
  f.plan.alpha = (Vec(6) << 0.1, 0.2, 0.3, 0.15, 0.1, 0.15).finished();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.5);
  for (int k = 0; k < 6; ++k) f.grads.push_back(Vec::NullaryExpr(4, [&] { return n(rng); }));
  return f;
}

TEST(ClusterPlanTest, Validation) {
  Fixture f = SixDevices();
  EXPECT_NO_THROW(f.plan.Validate());
  ClusterPlan bad = f.plan;
  bad.clusters = {{0, 1, 2, 3}, {4, 5}};
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = f.plan;
  bad.clusters = {{0, 1, 2}, {2, 4, 5}};
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = f.plan;
  bad.alpha[0] = 0.2;
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = f.plan;
  bad.alpha[0] = -0.1;
  bad.alpha[1] = 0.4;
  EXPECT_THROW(bad.Validate(), ConfigError);
}

TEST(AggregateTest, NoiselessSumOfWeightedGradients) {
  Fixture f = SixDevices();
  std::mt19937_64 rng(2);
  const auto r = ClusterAggregate(f.plan, f.grads, f.ch, f.pc, rng);
  Vec expect0 = 0.1 * f.grads[0] + 0.2 * f.grads[1] + 0.3 * f.grads[2];
  Vec expect1 = 0.15 * f.grads[3] + 0.15 * f.grads[5];
  ASSERT_TRUE(r.updates[0].active);
  ASSERT_TRUE(r.updates[1].active);
  EXPECT_LT((r.updates[0].g - expect0).norm(), 1e-12);
  EXPECT_LT((r.updates[1].g - expect1).norm(), 1e-12);
  EXPECT_FALSE(r.transmitted[4]);
  EXPECT_EQ(r.transmit_power[4], 0.0);
  for (int k : {0, 1, 2, 3, 5}) {
    EXPECT_TRUE(r.transmitted[k]);
    // |rho|^2 |g|^2 <= P since |g| <= G.
    EXPECT_LE(r.transmit_power[k], f.pc.p_max);
  }
}

TEST(AggregateTest, InactiveClusterWhenEveryMemberTruncated) {
  Fixture f = SixDevices();
  f.ch.threshold = 5.0;
  f.ch.activated.clear();
  std::mt19937_64 rng(2);
  const auto r = ClusterAggregate(f.plan, f.grads, f.ch, f.pc, rng);
  for (const auto& u : r.updates) {
    EXPECT_FALSE(u.active);
    EXPECT_EQ(u.g.size(), 0);
  }
}

TEST(AggregateTest, HomogeneousInGradients) {
  Fixture f = SixDevices();
  std::vector<Vec> scaled;
  for (const auto& g : f.grads) scaled.push_back(-2.5 * g);
  std::mt19937_64 a(1);
  std::mt19937_64 b(1);
  const auto x = ClusterAggregate(f.plan, f.grads, f.ch, f.pc, a);
  const auto y = ClusterAggregate(f.plan, scaled, f.ch, f.pc, b);
  for (int n = 0; n < 2; ++n) {
    EXPECT_LT((y.updates[n].g + 2.5 * x.updates[n].g).norm(), 1e-12);
  }
}

TEST(NoisePowerTest, HandExample) {
  Fixture f = SixDevices();
  f.pc.noise_power = 1e-6;
  // Cluster 0 gains: 0.5, 1.0, 1.0; alpha/gain = 0.2, 0.2, 0.3 -> max^2 0.09.
  // Cluster 1: device 3 gain 1.3*0.8 = 1.04, ratio 0.15/1.04; device 5 gain
  // 0.5*1.5 = 0.75, ratio 0.2 -> 0.04 (device 4 truncated).
  const double scale = 1e-6 * 4.0 / (2.0 * 1e-3);
  EXPECT_NEAR(ClusterNoisePower(f.plan.clusters[0], f.plan.alpha, f.ch, f.pc),
              scale * 0.09, 1e-15);
  EXPECT_NEAR(ClusterNoisePower(f.plan.clusters[1], f.plan.alpha, f.ch, f.pc),
              scale * 0.04, 1e-15);
  const std::vector<int> both = {0, 1};
  const std::vector<int> second = {1};
  EXPECT_NEAR(EquivalentNoisePower(f.plan, both, f.ch, f.pc), scale * 0.13, 1e-15);
  EXPECT_NEAR(EquivalentNoisePower(f.plan, second, f.ch, f.pc), scale * 0.04, 1e-15);
  EXPECT_EQ(EquivalentNoisePower(f.plan, std::vector<int>{}, f.ch, f.pc), 0.0);
}

TEST(NoisePowerTest, ScalingFactorPathAgrees) {
  // sigma^2 / (2 zeta^2) and the closed form are the same quantity.
  Fixture f = SixDevices();
  f.pc.noise_power = 3e-7;
  for (int n = 0; n < 2; ++n) {
    const auto zeta = ScalingFactor(f.plan.clusters[n], f.ch, f.plan.alpha, f.pc);
    ASSERT_TRUE(zeta);
    const double via_zeta = f.pc.noise_power / (2.0 * *zeta * *zeta);
    const double closed = ClusterNoisePower(f.plan.clusters[n], f.plan.alpha, f.ch, f.pc);
    EXPECT_NEAR(via_zeta, closed, 1e-9 * closed);
  }
}

TEST(NoisePowerTest, EmpiricalVarianceMatches) {
  Fixture f = SixDevices();
  f.pc.noise_power = 1e-4;
  std::vector<Vec> zeros(6, Vec::Zero(20000));
  std::mt19937_64 rng(11);
  const auto r = ClusterAggregate(f.plan, zeros, f.ch, f.pc, rng);
  for (int n = 0; n < 2; ++n) {
    const double expected = ClusterNoisePower(f.plan.clusters[n], f.plan.alpha, f.ch, f.pc);
    const double var = r.updates[n].g.squaredNorm() / 20000.0;
    EXPECT_NEAR(var, expected, 5.0 * expected * std::sqrt(2.0 / 20000.0));
    EXPECT_NEAR(r.updates[n].g.mean(), 0.0, 5.0 * std::sqrt(expected / 20000.0));
  }
}

TEST(AggregateTest, NoiseStreamsAreIndependentPerCluster) {
  Fixture f = SixDevices();
  f.pc.noise_power = 1e-4;
  std::mt19937_64 a(5);
  std::mt19937_64 b(5);
  const auto x = ClusterAggregate(f.plan, f.grads, f.ch, f.pc, a);
  const auto y = ClusterAggregate(f.plan, f.grads, f.ch, f.pc, b);
  EXPECT_EQ(x.updates[1].g, y.updates[1].g);
  EXPECT_NE(x.updates[0].g - 0.1 * f.grads[0], x.updates[1].g);
}

TEST(AggregateTest, FullPowerDeviceBypassesScaling) {
  Fixture f = SixDevices();
  TransmitterRoles roles{.full_power = {false, true, false, false, false, false}};
  std::mt19937_64 rng(2);
  const auto r = ClusterAggregate(f.plan, f.grads, f.ch, f.pc, roles, rng);
  const double zeta = r.updates[0].zeta;
  const double amp = std::abs(f.ch.h[1]) * f.ch.beta[1] * std::sqrt(f.pc.p_max) /
                     f.grads[1].norm() / zeta;
  const Vec expect = 0.1 * f.grads[0] + amp * f.grads[1] + 0.3 * f.grads[2];
  EXPECT_LT((r.updates[0].g - expect).norm(), 1e-10);
  EXPECT_NEAR(r.transmit_power[1], f.pc.p_max, 1e-15);
}

}  // namespace
}  // namespace airfl
