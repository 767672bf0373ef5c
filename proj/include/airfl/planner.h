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

#ifndef AIRFL_PLANNER_H_
#define AIRFL_PLANNER_H_

#include "airfl/aircomp.h"
#include "airfl/channel.h"
#include "airfl/common.h"
#include "airfl/weighting.h"
#include "airfl/zta.h"

namespace airfl {

struct PlannerConfig {
  int cluster_size = 1;
  int num_clusters = 1;
  int assumed_byzantine = 0;
  double v = 1e5;
  double smoothness = 1.0;
  double eta = 0.005;
  double noise_weight_scale = 1.0;  // multiplies every noise weight
  PowerConfig power;
  ContributionScale scale = ContributionScale::kMeanOne;
  PccpSchedule schedule;
};

// Clusters left after writing off every cluster a suspect may touch, never
// fewer than one.
int SurvivingClusterCount(int num_clusters, int cluster_size, int byzantine);

struct RoundContributions {
  Vec gamma;      // every device
  Vec gamma_bar;  // normalised over the pool, every device
};

RoundContributions ComputeContributions(const Vec& grad_norm_sq,
                                        const Vec& delta, double eta,
                                        double smoothness,
                                        std::span<const int> pool,
                                        ContributionScale scale);

struct PlanInputs {
  const RoundChannel* channel = nullptr;
  Vec grad_norm_sq;  // as reported by the devices
  Vec delta;
  Vec queues;
  IndexSet suspects;
};

struct RoundPlan {
  ClusterPlan plan;
  IndexSet trusted;  // activated devices outside the suspect list
  RoundContributions contributions;
  WeightingProblem problem;
  WeightingSolution solution;
  bool fallback = false;
};

// Weights from the P-CCP optimiser over the trusted devices (zero elsewhere),
// then sequential clustering of all devices on |h|beta/alpha. Zero-weight
// devices sort last with the suspects behind everyone else, so suspects
// share the trailing clusters. With no trusted device the plan is uniform
// weights under sequential clustering and `fallback` is set.
RoundPlan PlanRound(const PlannerConfig& config, const PlanInputs& inputs);

// Uniform weights, clusters cut from the equivalent-channel order.
ClusterPlan UniformSequentialPlan(const RoundChannel& channel, int cluster_size);

}  // namespace airfl

#endif  // AIRFL_PLANNER_H_
