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

#ifndef AIRFL_CONFIG_H_
#define AIRFL_CONFIG_H_

#include <cstdint>
#include <string>

#include <json.hpp>

#include "airfl/adversary.h"
#include "airfl/weighting.h"
#include "airfl/zta.h"

namespace airfl {

enum class Scheme {
  kFedsac,
  kIdeal,
  kNonRobust,
  kRandomClustering,
  kNoAdaptiveWeighting,
};

Scheme ParseScheme(const std::string& name);
std::string SchemeName(Scheme scheme);

enum class TaskKind { kMnist, kQuadratic, kGaussian };

TaskKind ParseTask(const std::string& name);
std::string TaskName(TaskKind task);

// Every knob of one experiment. The JSON form is a flat object whose keys are
// the field names below; missing keys keep these defaults.
struct ExperimentConfig {
  // Population.
  int devices = 40;
  int byzantine = 6;
  int clusters = 4;
  int assumed_byzantine = -1;  // negative: same as `byzantine`
  Scheme scheme = Scheme::kFedsac;

  // Attack.
  AttackTag attack = AttackTag::kSignFlip;
  double gaussian_mean = 1.0;
  double gaussian_std = 1.0;
  bool byzantine_full_power = true;

  // Channel.
  double truncation_threshold = 0.2;
  double p_max_dbm = 0.0;
  double noise_power = 1e-6;
  double distance_near = 150.0;
  double distance_far = 500.0;
  double clip_norm = 10.0;

  // Task.
  TaskKind task = TaskKind::kMnist;
  std::string data_dir = "data/mnist";
  std::string model = "mlp";  // mlp | linear_softmax
  int train_samples = 2000;
  int test_samples = 1000;
  int hidden_units = 30;
  int labels_per_device = 1;
  double root_fraction = 0.01;
  int quadratic_dim = 20;
  int quadratic_rows = 40;
  double quadratic_heterogeneity = 1.0;
  double quadratic_target_noise = 0.0;
  int gaussian_samples = 2000;
  int gaussian_features = 20;
  int gaussian_classes = 10;
  double gaussian_separation = 3.0;

  // Learning.
  double eta = 0.005;
  int batch_size = 32;  // 0: full local shard
  int rounds = 200;
  int init_rounds = 10;
  int eval_every = 5;
  int resource_budget = 0;  // > 0: rounds = budget / clusters
  double smoothness = 1.0;  // replaced by the exact value on the quadratic task
  double pl_constant = 0.0;

  // Defense.
  double cosine_threshold = 0.0;
  double v = 1e5;
  double fairness_target = -1.0;   // negative: 0.5 / devices
  double absence_penalty = -1.0;   // negative: estimated after init rounds
  double provisional_penalty = 1.0;
  ContributionScale contribution_scale = ContributionScale::kMeanOne;
  double tau0 = 1.0;
  double tau_growth = 3.0;
  double tau_max = 1e6;
  double chi = 1e-4;
  int pccp_max_iterations = 100;
  double pccp_tolerance = 1e-4;  // relative change of the surrogate value
  bool structured_candidates = true;
  // Count the noise of every model coordinate in the planner's noise weight.
  bool noise_weight_per_dimension = false;

  // Diagnostics.
  bool analyze = true;
  int delta_pilot_rounds = 20;
  int delta_checkpoint_every = 5;
  int delta_batches = 4;
  double delta_margin = 0.1;
  double delta_override = -1.0;  // >= 0: same delta for every device

  std::uint64_t seed = 1;

  int cluster_size() const { return devices / clusters; }
  int effective_rounds() const;
  int suspects() const {
    return assumed_byzantine < 0 ? byzantine : assumed_byzantine;
  }
  double fairness() const {
    return fairness_target < 0.0 ? 0.5 / devices : fairness_target;
  }
  // Throws ConfigError on inconsistent values.
  void Validate() const;
};

nlohmann::json ToJson(const ExperimentConfig& config);
// Unknown keys are rejected so typos do not silently fall back to defaults.
ExperimentConfig ConfigFromJson(const nlohmann::json& j);
ExperimentConfig LoadConfig(const std::string& path);

// Sets one key from its textual value ("scheme=ideal", "eta=0.01").
void SetConfigValue(ExperimentConfig& config, const std::string& key,
                    const std::string& value);

}  // namespace airfl

#endif  // AIRFL_CONFIG_H_
