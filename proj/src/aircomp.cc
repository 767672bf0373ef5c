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

#include "airfl/aircomp.h"

#include <cmath>

namespace airfl {

void ClusterPlan::Validate() const {
  const int k_total = num_devices();
  if (clusters.empty()) throw ConfigError("plan has no clusters");
  const std::size_t block = clusters.front().size();
  std::vector<int> seen(k_total, 0);
  for (const auto& c : clusters) {
    if (c.size() != block) throw ConfigError("clusters differ in size");
    for (int k : c) {
      if (k < 0 || k >= k_total) throw ConfigError("cluster index out of range");
      ++seen[k];
    }
  }
  for (int s : seen) {
    if (s != 1) throw ConfigError("clusters do not partition the devices");
  }
  if ((alpha.array() < 0.0).any()) throw ConfigError("negative weight");
  if (std::abs(alpha.sum() - 1.0) > 1e-9) {
    throw ConfigError("weights do not sum to one");
  }
}

AggregationResult ClusterAggregate(const ClusterPlan& plan,
                                   std::span<const Vec> grads,
                                   const RoundChannel& ch,
                                   const PowerConfig& pc,
                                   const TransmitterRoles& roles,
                                   std::mt19937_64& rng) {
  const int k_total = plan.num_devices();
  const Eigen::Index dim = grads.front().size();
  AggregationResult out;
  out.transmit_power = Vec::Zero(k_total);
  out.transmitted.assign(k_total, false);
  out.updates.resize(plan.clusters.size());
  const double noise_std = std::sqrt(pc.noise_power / 2.0);

  for (std::size_t n = 0; n < plan.clusters.size(); ++n) {
    // One sub-stream per cluster, drawn in cluster order.
    std::mt19937_64 cluster_rng(rng());
    const IndexSet& members = plan.clusters[n];
    const auto zeta = ScalingFactor(members, ch, plan.alpha, pc);
    ClusterUpdate& upd = out.updates[n];
    if (!zeta) continue;
    upd.active = true;
    upd.zeta = *zeta;
    upd.g = Vec::Zero(dim);
    for (int k : members) {
      const bool rogue = !roles.full_power.empty() && roles.full_power[k];
      Complex rho;
      if (rogue) {
        const double norm = grads[k].norm();
        if (norm == 0.0) continue;
        const double mag = std::abs(ch.h[k]);
        const Complex phase =
            mag > 0.0 ? std::conj(ch.h[k]) / mag : Complex(1.0, 0.0);
        rho = std::sqrt(pc.p_max) / norm * phase;
      } else {
        rho = PreprocessFactor(k, ch, plan.alpha, upd.zeta);
        if (rho == Complex(0.0, 0.0)) continue;
      }
      const Complex received = ch.h[k] * ch.beta[k] * rho;
      out.transmit_power[k] = std::norm(rho) * grads[k].squaredNorm();
      out.transmitted[k] = true;
      upd.g += (received.real() / upd.zeta) * grads[k];
    }
    if (noise_std > 0.0) {
      std::normal_distribution<double> normal(0.0, noise_std / upd.zeta);
      for (Eigen::Index j = 0; j < dim; ++j) upd.g[j] += normal(cluster_rng);
    }
  }
  return out;
}

AggregationResult ClusterAggregate(const ClusterPlan& plan,
                                   std::span<const Vec> grads,
                                   const RoundChannel& ch,
                                   const PowerConfig& pc, std::mt19937_64& rng) {
  return ClusterAggregate(plan, grads, ch, pc, TransmitterRoles{}, rng);
}

double ClusterNoisePower(std::span<const int> members, const Vec& alpha,
                         const RoundChannel& ch, const PowerConfig& pc) {
  double worst = 0.0;
  for (int k : members) {
    if (!ch.is_activated(k) || !(alpha[k] > 0.0)) continue;
    const double ratio = alpha[k] / ch.gain(k);
    worst = std::max(worst, ratio * ratio);
  }
  return pc.noise_power * pc.clip_norm * pc.clip_norm / (2.0 * pc.p_max) *
         worst;
}

double EquivalentNoisePower(const ClusterPlan& plan,
                            std::span<const int> surviving,
                            const RoundChannel& ch, const PowerConfig& pc) {
  double total = 0.0;
  for (int n : surviving) {
    total += ClusterNoisePower(plan.clusters[n], plan.alpha, ch, pc);
  }
  return total;
}

}  // namespace airfl
