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

#ifndef AIRFL_HARNESS_H_
#define AIRFL_HARNESS_H_

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "airfl/adversary.h"
#include "airfl/aircomp.h"
#include "airfl/channel.h"
#include "airfl/config.h"
#include "airfl/dataset.h"
#include "airfl/model.h"
#include "airfl/planner.h"
#include "airfl/robust_agg.h"
#include "airfl/zta.h"

namespace airfl {

// Data, model family and analytical constants shared by every round.
struct TaskBundle {
  std::shared_ptr<const Architecture> arch;
  std::vector<Dataset> partitions;
  Dataset root;
  Dataset test;
  double smoothness = 1.0;
  double pl_constant = 0.0;
  std::optional<double> f_star;  // known on the quadratic task only
};

TaskBundle BuildTask(const ExperimentConfig& config);

// How a round's clusters and weights were chosen.
enum class PlanSource {
  kUniformSingle,      // one cluster, uniform weights
  kUniformRandom,      // random clusters, uniform weights
  kUniformSequential,  // sequential clusters, uniform weights
  kOptimized,          // weighting optimiser + sequential clusters
  kFallback,           // optimiser had no trusted device
};

std::string PlanSourceName(PlanSource source);

struct RoundMetrics {
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  int round = 0;
  double test_accuracy = kNaN;  // only on evaluation rounds
  double test_loss = kNaN;
  double global_loss = kNaN;
  int participants = 0;  // |S_m|
  int surviving = 0;     // |B_m|
  int active_clusters = 0;
  double noise = 0.0;  // equivalent noise power of the survivors
  double precision = kNaN;
  double recall = kNaN;
  double queue_max = 0.0;  // over honest devices
  double lemma1_bound = kNaN;
  double contraction = kNaN;
  double offset = kNaN;
  double alpha_participating = 0.0;
  bool skipped = false;
  bool filter_bypassed = false;
  int power_violations = 0;
  double max_power_ratio = 0.0;  // honest devices, |rho g|^2 / P_max
  std::string plan_source;
  bool planner_degraded = false;
};

// Fixed CSV layout of RoundMetrics.
std::string MetricsCsvHeader();
std::string MetricsCsvRow(const RoundMetrics& m);

// Everything decided before the noise of a round is drawn.
struct PreparedRound {
  int round = 0;
  RoundChannel channel;
  std::vector<Vec> sent;        // per device, after clipping and attack
  Vec reported_norm_sq;
  ClusterPlan plan;
  PlanSource source = PlanSource::kUniformSingle;
  IndexSet suspects;
  IndexSet pool;                // normalisation pool of the contributions
  RoundContributions contributions;
  bool planner_degraded = false;
  Vec root_gradient;
};

struct AggregatedRound {
  AggregationResult aggregation;
  FilterOutcome filter;
  Vec next_w;
};

// One experiment. Rounds are run one at a time; every random draw comes from
// a stream keyed by (seed, purpose, round, device), so a run does not depend
// on evaluation order. The cluster noise uses `noise_seed`, which defaults to
// the master seed and can be changed to redraw only the receiver noise.
class Experiment {
 public:
  explicit Experiment(const ExperimentConfig& config);
  Experiment(const ExperimentConfig& config, TaskBundle task);

  const ExperimentConfig& config() const { return config_; }
  const TaskBundle& task() const { return task_; }
  const AdversaryRoster& roster() const { return roster_; }
  const Model& model() const { return model_; }
  const Vec& delta() const { return delta_; }
  const Vec& beta() const { return beta_; }
  const ReputationLedger& ledger() const { return ledger_; }
  const FairnessQueues& queues() const { return queues_; }
  double absence_penalty() const { return penalty_; }
  bool penalty_estimated() const { return penalty_estimated_; }
  int round() const { return round_; }
  // Running mean of alpha * gamma_bar per device over the rounds run so far.
  Vec MeanWeightedContribution() const;
  const PowerConfig& power() const { return power_; }

  void set_noise_seed(std::uint64_t seed) { noise_seed_ = seed; }

  PreparedRound Prepare() const;
  AggregatedRound Aggregate(const PreparedRound& prepared,
                            std::mt19937_64& noise_rng) const;
  RoundMetrics Commit(const PreparedRound& prepared,
                      const AggregatedRound& result);
  RoundMetrics Step();

  // Metrics of the current model without running a round (evaluation row).
  void Evaluate(RoundMetrics& m) const;

 private:
  void Initialize();
  void EstimateDeltas();
  void MaybeSelectPenalty();
  ClusterPlan UniformPlan(PlanSource source, const RoundChannel& ch) const;

  ExperimentConfig config_;
  TaskBundle task_;
  PowerConfig power_;
  AdversaryRoster roster_;
  Vec beta_;
  Vec delta_;
  Model model_;
  ReputationLedger ledger_;
  Vec excluded_mass_;
  FairnessQueues queues_;
  ExclusionTracker tracker_;
  double penalty_ = 1.0;
  bool penalty_estimated_ = false;
  Vec contribution_sum_;
  int round_ = 0;
  std::uint64_t noise_seed_ = 0;
};

struct ExperimentSummary {
  nlohmann::json json;
  std::vector<RoundMetrics> rounds;
};

// Runs every round, writes metrics.csv (flushed per round) and summary.json
// into `output_dir` when it is nonempty.
ExperimentSummary RunExperiment(const ExperimentConfig& config,
                                const std::string& output_dir = "");

}  // namespace airfl

#endif  // AIRFL_HARNESS_H_
