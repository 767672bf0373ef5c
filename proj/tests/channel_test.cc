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

#include "airfl/channel.h"

namespace airfl {
namespace {

RoundChannel FixedChannel(std::vector<Complex> h, Vec beta, double threshold) {
  RoundChannel ch;
  ch.h = std::move(h);
  ch.beta = std::move(beta);
  ch.threshold = threshold;
  for (int k = 0; k < ch.num_devices(); ++k) {
    if (ch.is_activated(k)) ch.activated.push_back(k);
  }
  return ch;
}

TEST(ChannelTest, RayleighStatistics) {
  std::mt19937_64 rng(17);
  const int n = 200000;
  const RoundChannel ch = SampleRoundChannel(rng, Vec::Ones(n), 0.2);
  double power = 0.0;
  double re = 0.0;
  for (const auto& h : ch.h) {
    power += std::norm(h);
    re += h.real();
  }
  power /= n;
  re /= n;
  // |h|^2 is Exp(1): standard error of the mean is 1/sqrt(n).
  EXPECT_NEAR(power, 1.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(re, 0.0, 5.0 * std::sqrt(0.5 / n));
  const double rate = static_cast<double>(ch.activated.size()) / n;
  const double expected = std::exp(-0.04);
  EXPECT_NEAR(rate, expected, 5.0 * std::sqrt(expected * (1 - expected) / n));
}

TEST(ChannelTest, ActivationIsInclusiveAtThreshold) {
  const RoundChannel ch =
      FixedChannel({Complex(0.2, 0.0), Complex(0.1999, 0.0), Complex(0.0, 1.0)},
                   Vec::Ones(3), 0.2);
  EXPECT_TRUE(ch.is_activated(0));
  EXPECT_FALSE(ch.is_activated(1));
  EXPECT_EQ(ch.activated, (IndexSet{0, 2}));
}

TEST(ChannelTest, LargeScaleFadingValues) {
  Vec d(3);
  d << 1.0, 100.0, 500.0;
  const Vec beta = LargeScaleFading(d);
  EXPECT_DOUBLE_EQ(beta[0], 1.0);
  EXPECT_NEAR(beta[1], std::pow(10.0, -2.2), 1e-15);
  EXPECT_NEAR(beta[2], std::exp(-1.1 * std::log(500.0)), 1e-15);
  d[0] = 0.0;
  EXPECT_THROW(LargeScaleFading(d), ConfigError);
}

TEST(ChannelTest, DistancesInRange) {
  std::mt19937_64 rng(2);
  const Vec d = SampleDistances(rng, 1000, 150.0, 500.0);
  EXPECT_GE(d.minCoeff(), 150.0);
  EXPECT_LE(d.maxCoeff(), 500.0);
  EXPECT_THROW(SampleDistances(rng, 3, 0.0, 1.0), ConfigError);
}

TEST(ChannelTest, DbmConversion) {
  EXPECT_DOUBLE_EQ(DbmToWatts(0.0), 1e-3);
  EXPECT_NEAR(DbmToWatts(30.0), 1.0, 1e-12);
  EXPECT_NEAR(WattsToDbm(DbmToWatts(-7.5)), -7.5, 1e-12);
}

TEST(ScalingFactorTest, HandExample) {
  // Gains |h|beta = 2, 0.5, 3 (device 1 truncated at 0.6 since |h| = 0.5).
  const RoundChannel ch = FixedChannel(
      {Complex(0.0, 2.0), Complex(0.5, 0.0), Complex(3.0, 0.0)}, Vec::Ones(3), 0.6);
  Vec alpha(3);
  alpha << 0.5, 0.25, 0.25;
  PowerConfig pc{.p_max = 4.0, .clip_norm = 2.0, .noise_power = 0.0};
  // min over {0, 2} of gain/alpha = min(4, 12) = 4; sqrt(P)/G = 1.
  const auto zeta = ScalingFactor(std::vector<int>{0, 1, 2}, ch, alpha, pc);
  ASSERT_TRUE(zeta.has_value());
  EXPECT_NEAR(*zeta, 4.0, 1e-10);
  EXPECT_LE(*zeta, 4.0);
}

TEST(ScalingFactorTest, InactiveCluster) {
  const RoundChannel ch =
      FixedChannel({Complex(0.1, 0.0), Complex(1.0, 0.0)}, Vec::Ones(2), 0.2);
  Vec alpha(2);
  alpha << 1.0, 0.0;
  PowerConfig pc;
  EXPECT_FALSE(ScalingFactor(std::vector<int>{0, 1}, ch, alpha, pc).has_value());
  EXPECT_FALSE(ScalingFactor(std::vector<int>{}, ch, alpha, pc).has_value());
}

TEST(PreprocessTest, InvertsChannelAndMeetsPowerBudget) {
  std::mt19937_64 rng(8);
  Vec beta(6);
  beta << 1e-3, 2e-3, 5e-4, 1e-3, 3e-3, 8e-4;
  PowerConfig pc{.p_max = 1e-3, .clip_norm = 10.0, .noise_power = 1e-6};
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const RoundChannel ch = SampleRoundChannel(rng, beta, 0.2);
    Vec alpha = Vec::NullaryExpr(6, [&] { return u(rng); });
    alpha /= alpha.sum();
    const std::vector<int> members = {0, 1, 2, 3, 4, 5};
    const auto zeta = ScalingFactor(members, ch, alpha, pc);
    if (!zeta) continue;
    double peak = 0.0;
    for (int k : members) {
      const Complex rho = PreprocessFactor(k, ch, alpha, *zeta);
      if (!ch.is_activated(k)) {
        EXPECT_EQ(rho, Complex(0.0, 0.0));
        continue;
      }
      // h beta rho is the real number zeta alpha.
      const Complex received = ch.h[k] * ch.beta[k] * rho;
      EXPECT_NEAR(received.real(), *zeta * alpha[k], 1e-12 * *zeta);
      EXPECT_NEAR(received.imag(), 0.0, 1e-12 * *zeta);
      // Worst case gradient norm G.
      const double power = std::norm(rho) * pc.clip_norm * pc.clip_norm;
      EXPECT_LE(power, pc.p_max);
      peak = std::max(peak, power);
    }
    // The binding device sits exactly at the budget up to the backoff.
    EXPECT_NEAR(peak, pc.p_max, 1e-10 * pc.p_max);
  }
}

TEST(PowerConfigTest, Validation) {
  EXPECT_NO_THROW(PowerConfig{}.Validate());
  EXPECT_THROW((PowerConfig{.p_max = 0.0}).Validate(), ConfigError);
  EXPECT_THROW((PowerConfig{.p_max = 1.0, .clip_norm = -1.0}).Validate(), ConfigError);
  EXPECT_THROW((PowerConfig{.p_max = 1.0, .clip_norm = 1.0, .noise_power = -1.0}).Validate(),
               ConfigError);
}

}  // namespace
}  // namespace airfl
