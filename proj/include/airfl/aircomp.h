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

#ifndef AIRFL_AIRCOMP_H_
#define AIRFL_AIRCOMP_H_

#include <random>
#include <span>
#include <vector>

#include "airfl/channel.h"
#include "airfl/common.h"

namespace airfl {

// Partition of the K devices into N clusters of equal size plus the weights.
struct ClusterPlan {
  std::vector<IndexSet> clusters;
  Vec alpha;

  int num_clusters() const { return static_cast<int>(clusters.size()); }
  int num_devices() const { return static_cast<int>(alpha.size()); }
  // Throws ConfigError unless the clusters partition [K] into equal blocks,
  // alpha >= 0 and sum(alpha) = 1 within 1e-9.
  void Validate() const;
};

struct ClusterUpdate {
  Vec g;             // empty when inactive
  double zeta = 0.0;
  bool active = false;
};

struct AggregationResult {
  std::vector<ClusterUpdate> updates;
  // |rho_k g_k|^2 for every device; zero for silent devices.
  Vec transmit_power;
  // Devices whose signal reached an active cluster's receiver.
  std::vector<bool> transmitted;
};

// Per-device behaviour at the transmitter.
struct TransmitterRoles {
  // Devices sending a phase-aligned full-power signal regardless of zeta,
  // alpha and truncation.
  std::vector<bool> full_power;
};

// Hierarchical AirComp. Cluster n receives sum_k h_k beta_k rho_k x_k plus
// CN(0, sigma^2) noise and the server keeps Re(y)/zeta_n, so honest members
// contribute alpha_k g_k exactly and the noise is N(0, sigma^2/(2 zeta_n^2))
// per coordinate. Clusters with no activated positive-weight member are
// inactive and are not received at all.
AggregationResult ClusterAggregate(const ClusterPlan& plan,
                                   std::span<const Vec> grads,
                                   const RoundChannel& ch,
                                   const PowerConfig& pc,
                                   const TransmitterRoles& roles,
                                   std::mt19937_64& rng);

// Same with every device honest.
AggregationResult ClusterAggregate(const ClusterPlan& plan,
                                   std::span<const Vec> grads,
                                   const RoundChannel& ch,
                                   const PowerConfig& pc, std::mt19937_64& rng);

// sum over surviving clusters of (sigma^2 G^2 / (2 P)) * max alpha^2/|h beta|^2
// over activated members.
double EquivalentNoisePower(const ClusterPlan& plan,
                            std::span<const int> surviving,
                            const RoundChannel& ch, const PowerConfig& pc);

// The same quantity for a single cluster.
double ClusterNoisePower(std::span<const int> members, const Vec& alpha,
                         const RoundChannel& ch, const PowerConfig& pc);

}  // namespace airfl

#endif  // AIRFL_AIRCOMP_H_
