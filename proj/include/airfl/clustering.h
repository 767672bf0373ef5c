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

#ifndef AIRFL_CLUSTERING_H_
#define AIRFL_CLUSTERING_H_

#include <functional>
#include <random>
#include <span>
#include <vector>

#include "airfl/aircomp.h"
#include "airfl/channel.h"
#include "airfl/common.h"

namespace airfl {

// |h_k| beta_k / alpha_k, +infinity for zero weight. Truncated devices are
// also +infinity since they never transmit.
std::vector<double> EquivalentChannel(const RoundChannel& ch, const Vec& alpha);

// Sorts devices ascending by (value, tier, index) and cuts the order into
// consecutive blocks of `block` devices. `tier` is optional and only breaks
// ties; pass it to keep one class of zero-weight devices behind another.
std::vector<IndexSet> SequentialCluster(std::span<const double> values,
                                        int block,
                                        std::span<const int> tier = {});

// Uniformly random equal-size partition.
std::vector<IndexSet> RandomClusters(std::mt19937_64& rng, int num_devices,
                                     int block);

// Calls `visit` once per unordered partition of {0..n-1} into blocks of size
// `block`. Blocks are listed by their smallest element.
void ForEachEqualPartition(
    int n, int block,
    const std::function<void(const std::vector<IndexSet>&)>& visit);

struct BruteForceResult {
  std::vector<IndexSet> clusters;
  double noise_power = 0.0;
  long partitions_checked = 0;
};

// Exhaustive minimum of the equivalent noise power over all equal-block
// partitions (every cluster counted). Refuses more than 10 devices.
BruteForceResult BruteForceCluster(const Vec& alpha, const RoundChannel& ch,
                                   const PowerConfig& pc, int block);

}  // namespace airfl

#endif  // AIRFL_CLUSTERING_H_
