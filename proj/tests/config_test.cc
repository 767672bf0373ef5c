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


#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "airfl/config.h"

namespace airfl {
namespace {

TEST(ConfigTest, DefaultsValidate) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.Validate());
  EXPECT_EQ(c.cluster_size(), 10);
  EXPECT_DOUBLE_EQ(c.fairness(), 0.5 / 40);
  EXPECT_EQ(c.suspects(), 6);
  c.assumed_byzantine = 2;
  EXPECT_EQ(c.suspects(), 2);
  c.resource_budget = 200;
  EXPECT_EQ(c.effective_rounds(), 50);
}

TEST(ConfigTest, JsonRoundTrip) {
  ExperimentConfig c;
  c.devices = 12;
  c.clusters = 3;
  c.byzantine = 2;
  c.scheme = Scheme::kRandomClustering;
  c.attack = AttackTag::kGaussian;
  c.task = TaskKind::kQuadratic;
  c.contribution_scale = ContributionScale::kSumOne;
  c.eta = 0.0125;
  c.noise_weight_per_dimension = true;
  c.seed = 123456789012345ULL;
  const ExperimentConfig back = ConfigFromJson(ToJson(c));
  EXPECT_EQ(ToJson(back), ToJson(c));
  EXPECT_EQ(back.scheme, Scheme::kRandomClustering);
  EXPECT_EQ(back.attack, AttackTag::kGaussian);
  EXPECT_EQ(back.seed, 123456789012345ULL);
  EXPECT_DOUBLE_EQ(back.eta, 0.0125);
}

TEST(ConfigTest, MissingKeysKeepDefaults) {
  const ExperimentConfig c = ConfigFromJson(nlohmann::json{{"rounds", 7}});
  EXPECT_EQ(c.rounds, 7);
  EXPECT_EQ(c.devices, ExperimentConfig{}.devices);
}

TEST(ConfigTest, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(ConfigFromJson(nlohmann::json{{"round", 7}}), ConfigError);
  EXPECT_THROW(ConfigFromJson(nlohmann::json{{"rounds", "many"}}), ConfigError);
  EXPECT_THROW(ConfigFromJson(nlohmann::json{{"scheme", "best"}}), ConfigError);
  EXPECT_THROW(ConfigFromJson(nlohmann::json{{"devices", 10}, {"clusters", 4}}),
               ConfigError);
  EXPECT_THROW(ConfigFromJson(nlohmann::json{{"byzantine", 40}}), ConfigError);
  EXPECT_THROW(ConfigFromJson(nlohmann::json::array()), ConfigError);
}

TEST(ConfigTest, SetValueFromText) {
  ExperimentConfig c;
  SetConfigValue(c, "scheme", "ideal");
  SetConfigValue(c, "eta", "0.01");
  SetConfigValue(c, "clusters", "5");
  SetConfigValue(c, "analyze", "false");
  SetConfigValue(c, "attack", "label_flip");
  EXPECT_EQ(c.scheme, Scheme::kIdeal);
  EXPECT_DOUBLE_EQ(c.eta, 0.01);
  EXPECT_EQ(c.clusters, 5);
  EXPECT_FALSE(c.analyze);
  EXPECT_EQ(c.attack, AttackTag::kLabelFlip);
  EXPECT_THROW(SetConfigValue(c, "nope", "1"), ConfigError);
  EXPECT_THROW(SetConfigValue(c, "eta", "fast"), ConfigError);
  EXPECT_THROW(SetConfigValue(c, "clusters", "2.5"), ConfigError);
  EXPECT_THROW(SetConfigValue(c, "analyze", "maybe"), ConfigError);
}

TEST(ConfigTest, LoadFromFileWithComments) {
  const auto path = std::filesystem::temp_directory_path() / "airfl_config_test.json";
  {
    std::ofstream out(path);
    out << "{\n  // quick run\n  \"rounds\": 3,\n  \"scheme\": \"non_robust\"\n}\n";
  }
  const ExperimentConfig c = LoadConfig(path.string());
  EXPECT_EQ(c.rounds, 3);
  EXPECT_EQ(c.scheme, Scheme::kNonRobust);
  {
    std::ofstream out(path);
    out << "{ \"rounds\": ";
  }
  EXPECT_THROW(LoadConfig(path.string()), ConfigError);
  std::filesystem::remove(path);
  EXPECT_THROW(LoadConfig(path.string()), ConfigError);
}

TEST(ConfigTest, SchemeAndTaskNames) {
  for (Scheme s : {Scheme::kFedsac, Scheme::kIdeal, Scheme::kNonRobust,
                   Scheme::kRandomClustering, Scheme::kNoAdaptiveWeighting}) {
    EXPECT_EQ(ParseScheme(SchemeName(s)), s);
  }
  for (TaskKind t : {TaskKind::kMnist, TaskKind::kQuadratic, TaskKind::kGaussian}) {
    EXPECT_EQ(ParseTask(TaskName(t)), t);
  }
  EXPECT_THROW(ParseTask("cifar"), ConfigError);
}

}  // namespace
}  // namespace airfl
