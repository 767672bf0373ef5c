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

#include "airfl/clustering.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>

namespace airfl {

std::vector<double> EquivalentChannel(const RoundChannel& ch, const Vec& alpha) {
  std::vector<double> out(alpha.size());
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    out[k] = (alpha[k] > 0.0 && ch.is_activated(static_cast<int>(k)))
                 ? ch.gain(static_cast<int>(k)) / alpha[k]
                 : std::numeric_limits<double>::infinity();
  }
  return out;
}

std::vector<IndexSet> SequentialCluster(std::span<const double> values,
                                        int block, std::span<const int> tier) {
  const int n = static_cast<int>(values.size());
  if (block < 1 || n % block != 0) {
    throw ConfigError("device count must be a multiple of the cluster size");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int k) {
    return std::make_tuple(values[k], tier.empty() ? 0 : tier[k], k);
  };
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return key(a) < key(b); });
  std::vector<IndexSet> clusters(n / block);
  for (int i = 0; i < n; ++i) clusters[i / block].push_back(order[i]);
  return clusters;
}

std::vector<IndexSet> RandomClusters(std::mt19937_64& rng, int num_devices,
                                     int block) {
  if (block < 1 || num_devices % block != 0) {
    throw ConfigError("device count must be a multiple of the cluster size");
  }
  std::vector<int> order(num_devices);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<IndexSet> clusters(num_devices / block);
  for (int i = 0; i < num_devices; ++i) {
    clusters[i / block].push_back(order[i]);
  }
  for (auto& c : clusters) std::sort(c.begin(), c.end());
  return clusters;
}

namespace {

void Enumerate(std::vector<bool>& used, int block,
               std::vector<IndexSet>& current,
               const std::function<void(const std::vector<IndexSet>&)>& visit) {
  const int n = static_cast<int>(used.size());
  const auto first = std::find(used.begin(), used.end(), false);
  if (first == used.end()) {
    visit(current);
    return;
  }
  const int lead = static_cast<int>(first - used.begin());
  used[lead] = true;
  current.push_back({lead});
  // Choose the remaining block-1 members among indices above `lead`.
  std::function<void(int)> extend = [&](int from) {
    if (static_cast<int>(current.back().size()) == block) {
      Enumerate(used, block, current, visit);
      return;
    }
    for (int j = from; j < n; ++j) {
      if (used[j]) continue;
      used[j] = true;
      current.back().push_back(j);
      extend(j + 1);
      current.back().pop_back();
      used[j] = false;
    }
  };
  extend(lead + 1);
  current.pop_back();
  used[lead] = false;
}

}  // namespace

void ForEachEqualPartition(
    int n, int block,
    const std::function<void(const std::vector<IndexSet>&)>& visit) {
  if (block < 1 || n % block != 0) {
    throw ConfigError("device count must be a multiple of the cluster size");
  }
  std::vector<bool> used(n, false);
  std::vector<IndexSet> current;
  Enumerate(used, block, current, visit);
}

BruteForceResult BruteForceCluster(const Vec& alpha, const RoundChannel& ch,
                                   const PowerConfig& pc, int block) {
  const int n = static_cast<int>(alpha.size());
  if (n > 10) throw ConfigError("brute-force clustering is limited to K <= 10");
  BruteForceResult best;
  best.noise_power = std::numeric_limits<double>::infinity();
  ForEachEqualPartition(n, block, [&](const std::vector<IndexSet>& part) {
    ++best.partitions_checked;
    double total = 0.0;
    for (const auto& c : part) total += ClusterNoisePower(c, alpha, ch, pc);
    if (total < best.noise_power) {
      best.noise_power = total;
      best.clusters = part;
    }
  });
  return best;
}

}  // namespace airfl
