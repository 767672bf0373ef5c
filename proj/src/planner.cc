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

#include "airfl/planner.h"

#include <algorithm>
#include <vector>

#include "airfl/clustering.h"

namespace airfl {
namespace {

// Keeps the optimiser's noise weights strictly positive when the receiver is
// noiseless; the floor is far below any credit difference that matters.
constexpr double kRelativeNoiseFloor = 1e-12;

}  // namespace

int SurvivingClusterCount(int num_clusters, int cluster_size, int byzantine) {
  const int lost = (byzantine + cluster_size - 1) / cluster_size;
  return std::max(1, num_clusters - lost);
}

RoundContributions ComputeContributions(const Vec& grad_norm_sq,
                                        const Vec& delta, double eta,
                                        double smoothness,
                                        std::span<const int> pool,
                                        ContributionScale scale) {
  RoundContributions out;
  out.gamma.resize(grad_norm_sq.size());
  for (Eigen::Index k = 0; k < grad_norm_sq.size(); ++k) {
    out.gamma[k] = Contribution(grad_norm_sq[k], delta[k], eta, smoothness);
  }
  out.gamma_bar = NormalizeContributions(out.gamma, pool, scale);
  return out;
}

ClusterPlan UniformSequentialPlan(const RoundChannel& channel,
                                  int cluster_size) {
  const int k = channel.num_devices();
  ClusterPlan plan;
  plan.alpha = Vec::Constant(k, 1.0 / k);
  const std::vector<double> eq = EquivalentChannel(channel, plan.alpha);
  plan.clusters = SequentialCluster(eq, cluster_size);
  return plan;
}

RoundPlan PlanRound(const PlannerConfig& config, const PlanInputs& inputs) {
  const RoundChannel& ch = *inputs.channel;
  const int k_total = ch.num_devices();
  if (config.cluster_size * config.num_clusters != k_total) {
    throw ConfigError("cluster size times cluster count must equal K");
  }
  RoundPlan out;
  std::vector<bool> suspect(k_total, false);
  for (int k : inputs.suspects) suspect[k] = true;
  for (int k : ch.activated) {
    if (!suspect[k]) out.trusted.push_back(k);
  }
  out.contributions =
      ComputeContributions(inputs.grad_norm_sq, inputs.delta, config.eta,
                           config.smoothness, out.trusted, config.scale);

  if (out.trusted.empty()) {
    out.plan = UniformSequentialPlan(ch, config.cluster_size);
    out.fallback = true;
    return out;
  }

  const int n = static_cast<int>(out.trusted.size());
  WeightingProblem& prob = out.problem;
  prob.devices = out.trusted;
  prob.phi.resize(n);
  prob.varpi.resize(n);
  prob.cluster_size = config.cluster_size;
  prob.surviving_clusters = SurvivingClusterCount(
      config.num_clusters, config.cluster_size, config.assumed_byzantine);
  const PowerConfig& pc = config.power;
  for (int i = 0; i < n; ++i) {
    const int k = out.trusted[i];
    prob.phi[i] = config.v * out.contributions.gamma[k] +
                  inputs.queues[k] * out.contributions.gamma_bar[k];
    prob.varpi[i] = config.noise_weight_scale *
                    NoiseWeight(config.v, config.smoothness, config.eta,
                                pc.noise_power, pc.clip_norm, pc.p_max,
                                ch.gain(k));
  }
  const double floor =
      kRelativeNoiseFloor * std::max(1.0, prob.phi.cwiseAbs().maxCoeff());
  prob.varpi = prob.varpi.cwiseMax(floor);

  out.solution = PccpOptimize(prob, config.schedule);

  Vec alpha = Vec::Zero(k_total);
  for (int i = 0; i < n; ++i) alpha[out.trusted[i]] = out.solution.alpha[i];
  std::vector<int> tier(k_total, 0);
  for (int k = 0; k < k_total; ++k) tier[k] = suspect[k] ? 1 : 0;
  out.plan.alpha = alpha;
  out.plan.clusters =
      SequentialCluster(EquivalentChannel(ch, alpha), config.cluster_size, tier);
  return out;
}

}  // namespace airfl
