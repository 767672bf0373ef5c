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

#ifndef AIRFL_ROBUST_AGG_H_
#define AIRFL_ROBUST_AGG_H_

#include <span>
#include <vector>

#include "airfl/aircomp.h"
#include "airfl/common.h"
#include "airfl/dataset.h"
#include "airfl/model.h"

namespace airfl {

// Full-batch gradient of the loss on the server's clean root set.
Vec RootGradient(const Model& model, const Dataset& root);

struct FilterOutcome {
  IndexSet surviving;           // cluster indices, ascending
  std::vector<double> cosine;   // NaN for inactive clusters
  bool bypassed = false;        // root gradient was zero
};

// Cluster n survives iff it is active and cos(g_n, g0) >= threshold. A zero
// root gradient disables the test and every active cluster survives.
FilterOutcome CosineFilter(std::span<const ClusterUpdate> updates,
                           const Vec& g0, double threshold);

// Every active cluster survives (no defense).
FilterOutcome AcceptAllActive(std::span<const ClusterUpdate> updates);

// w - eta * sum over survivors of g_n. Returns w unchanged when there are no
// survivors.
Vec GlobalUpdate(const Vec& w, const FilterOutcome& outcome,
                 std::span<const ClusterUpdate> updates, double eta);

}  // namespace airfl

#endif  // AIRFL_ROBUST_AGG_H_
