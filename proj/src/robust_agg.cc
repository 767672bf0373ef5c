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

#include "airfl/robust_agg.h"

#include <cmath>
#include <limits>

namespace airfl {

Vec RootGradient(const Model& model, const Dataset& root) {
  if (root.size() == 0) throw ConfigError("root dataset is empty");
  return LocalGradient(model, FullBatch(root.size()), root);
}

FilterOutcome CosineFilter(std::span<const ClusterUpdate> updates,
                           const Vec& g0, double threshold) {
  const double root_norm = g0.norm();
  if (root_norm == 0.0) {
    FilterOutcome out = AcceptAllActive(updates);
    out.bypassed = true;
    return out;
  }
  FilterOutcome out;
  out.cosine.assign(updates.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t n = 0; n < updates.size(); ++n) {
    if (!updates[n].active) continue;
    const double norm = updates[n].g.norm();
    // A zero update has no direction; treat it as orthogonal.
    const double cos = norm == 0.0 ? 0.0 : updates[n].g.dot(g0) / (norm * root_norm);
    out.cosine[n] = cos;
    if (cos >= threshold) out.surviving.push_back(static_cast<int>(n));
  }
  return out;
}

FilterOutcome AcceptAllActive(std::span<const ClusterUpdate> updates) {
  FilterOutcome out;
  out.cosine.assign(updates.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t n = 0; n < updates.size(); ++n) {
    if (updates[n].active) out.surviving.push_back(static_cast<int>(n));
  }
  return out;
}

Vec GlobalUpdate(const Vec& w, const FilterOutcome& outcome,
                 std::span<const ClusterUpdate> updates, double eta) {
  if (!(eta > 0.0)) throw ConfigError("learning rate must be positive");
  Vec next = w;
  for (int n : outcome.surviving) next -= eta * updates[n].g;
  return next;
}

}  // namespace airfl
