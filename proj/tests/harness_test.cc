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


#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "airfl/clustering.h"
#include "airfl/harness.h"

namespace airfl {
namespace {

ExperimentConfig SmallQuadratic() {
  ExperimentConfig c;
  c.task = TaskKind::kQuadratic;
  c.devices = 8;
  c.byzantine = 2;
  c.clusters = 2;
  c.quadratic_dim = 6;
  c.quadratic_rows = 12;
  c.batch_size = 0;
  c.eta = 0.05;
  c.noise_power = 1e-12;
  c.rounds = 12;
  c.init_rounds = 4;
  c.eval_every = 3;
  c.delta_override = 0.05;
  c.analyze = false;
  c.seed = 5;
  return c;
}

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class HarnessFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("airfl_harness_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(HarnessFiles, SameSeedGivesIdenticalMetrics) {
  ExperimentConfig c = SmallQuadratic();
  c.analyze = true;
  c.delta_override = -1.0;
  c.delta_pilot_rounds = 6;
  RunExperiment(c, (dir_ / "a").string());
  RunExperiment(c, (dir_ / "b").string());
  const std::string a = ReadFile(dir_ / "a" / "metrics.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, ReadFile(dir_ / "b" / "metrics.csv"));
  c.seed = 6;
  RunExperiment(c, (dir_ / "c").string());
  EXPECT_NE(a, ReadFile(dir_ / "c" / "metrics.csv"));
}

TEST_F(HarnessFiles, ZeroRoundsWritesHeaderAndInitialMetrics) {
  ExperimentConfig c = SmallQuadratic();
  c.task = TaskKind::kGaussian;
  c.model = "linear_softmax";
  c.gaussian_samples = 400;
  c.gaussian_features = 5;
  c.gaussian_classes = 4;
  c.root_fraction = 0.05;
  c.smoothness = 1.0;
  c.rounds = 0;
  const ExperimentSummary s = RunExperiment(c, dir_.string());
  EXPECT_TRUE(s.rounds.empty());
  EXPECT_EQ(ReadFile(dir_ / "metrics.csv"), MetricsCsvHeader() + "\n");
  const auto j = nlohmann::json::parse(ReadFile(dir_ / "summary.json"));
  EXPECT_EQ(j["rounds"], 0);
  ASSERT_TRUE(j["initial"]["test_accuracy"].is_number());
  const double acc = j["initial"]["test_accuracy"];
  EXPECT_GE(acc, 0.0);
  EXPECT_LE(acc, 1.0);
  EXPECT_EQ(j["final"]["test_accuracy"], j["initial"]["test_accuracy"]);
}

TEST(HarnessTest, IdealRoundIsExactGradientStep) {
  ExperimentConfig c = SmallQuadratic();
  c.scheme = Scheme::kIdeal;
  c.clip_norm = 1e6;
  Experiment exp(c);
  EXPECT_TRUE(exp.roster().byzantine.empty());
  const Vec w0 = exp.model().w;
  const Vec g = GlobalGradient(exp.model(), exp.task().partitions);
  const RoundMetrics m = exp.Step();
  EXPECT_EQ(m.plan_source, "uniform_single");
  EXPECT_EQ(m.noise, 0.0);
  EXPECT_EQ(m.participants, c.devices);
  EXPECT_LT((exp.model().w - (w0 - c.eta * g)).norm(), 1e-12 * (1.0 + w0.norm()));
}

TEST(HarnessTest, NonRobustSkipsTheFilter) {
  ExperimentConfig c = SmallQuadratic();
  c.scheme = Scheme::kNonRobust;
  Experiment exp(c);
  for (int t = 0; t < 6; ++t) {
    const PreparedRound p = exp.Prepare();
    EXPECT_EQ(p.source, PlanSource::kUniformSingle);
    EXPECT_EQ(p.plan.num_clusters(), 1);
    EXPECT_EQ(p.root_gradient.size(), 0);
    std::mt19937_64 rng = Stream(c.seed, StreamTag::kClusterNoise, t);
    const AggregatedRound r = exp.Aggregate(p, rng);
    for (double cos : r.filter.cosine) EXPECT_TRUE(std::isnan(cos));
    const RoundMetrics m = exp.Commit(p, r);
    EXPECT_EQ(m.surviving, m.active_clusters);
  }
}

TEST(HarnessTest, RandomClusteringFollowsItsStream) {
  ExperimentConfig c = SmallQuadratic();
  c.scheme = Scheme::kRandomClustering;
  Experiment exp(c);
  for (int t = 0; t < 4; ++t) {
    const PreparedRound p = exp.Prepare();
    std::mt19937_64 rng = Stream(c.seed, StreamTag::kRandomClustering, t);
    std::vector<int> order(c.devices);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const int block = c.cluster_size();
    for (int n = 0; n < c.clusters; ++n) {
      IndexSet expected(order.begin() + n * block, order.begin() + (n + 1) * block);
      std::sort(expected.begin(), expected.end());
      EXPECT_EQ(p.plan.clusters[n], expected);
    }
    EXPECT_EQ(p.plan.alpha, Vec::Constant(c.devices, 1.0 / c.devices));
    exp.Step();
  }
}

TEST(HarnessTest, NoAdaptiveWeightingIsUniformSequential) {
  ExperimentConfig c = SmallQuadratic();
  c.scheme = Scheme::kNoAdaptiveWeighting;
  Experiment exp(c);
  for (int t = 0; t < 6; ++t) {
    const PreparedRound p = exp.Prepare();
    EXPECT_EQ(p.source, PlanSource::kUniformSequential);
    EXPECT_EQ(p.plan.alpha, Vec::Constant(c.devices, 1.0 / c.devices));
    EXPECT_EQ(p.plan.clusters,
              SequentialCluster(EquivalentChannel(p.channel, p.plan.alpha),
                                c.cluster_size()));
    exp.Step();
  }
}

TEST(HarnessTest, FedsacPlansAreValidAndRespectPower) {
  ExperimentConfig c = SmallQuadratic();
  Experiment exp(c);
  for (int t = 0; t < c.rounds; ++t) {
    const PreparedRound p = exp.Prepare();
    EXPECT_NO_THROW(p.plan.Validate());
    if (t >= c.init_rounds) {
      EXPECT_EQ(static_cast<int>(p.suspects.size()), c.byzantine);
    }
    const RoundMetrics m = exp.Step();
    EXPECT_EQ(m.power_violations, 0);
    EXPECT_LE(m.max_power_ratio, 1.0);
  }
}

TEST(HarnessTest, RejectsLargeStep) {
  ExperimentConfig c = SmallQuadratic();
  c.eta = 10.0;
  EXPECT_THROW(Experiment{c}, ParameterError);
}

TEST(HarnessTest, NoiseSeedOnlyChangesReceiverNoise) {
  ExperimentConfig c = SmallQuadratic();
  c.noise_power = 1e-4;
  Experiment a(c);
  Experiment b(c);
  b.set_noise_seed(999);
  const PreparedRound pa = a.Prepare();
  const PreparedRound pb = b.Prepare();
  EXPECT_EQ(pa.plan.clusters, pb.plan.clusters);
  EXPECT_EQ(pa.plan.alpha, pb.plan.alpha);
  a.Step();
  b.Step();
  EXPECT_NE(a.model().w, b.model().w);
}

TEST(HarnessTest, FedsacBeatsRandomClusteringOnMostSeeds) {
  int wins = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    ExperimentConfig c = SmallQuadratic();
    c.rounds = 30;
    c.noise_power = 1e-9;
    c.seed = 100 + s;
    const auto fed = RunExperiment(c);
    c.scheme = Scheme::kRandomClustering;
    const auto rnd = RunExperiment(c);
    const double a = fed.json["final"]["global_loss"];
    const double b = rnd.json["final"]["global_loss"];
    wins += a <= b;
  }
  EXPECT_GE(wins, 18) << wins << " of " << seeds;
}

}  // namespace
}  // namespace airfl
