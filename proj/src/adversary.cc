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

#include "airfl/adversary.h"

#include <algorithm>
#include <numeric>

namespace airfl {

AttackTag ParseAttackTag(const std::string& name) {
  if (name == "none") return AttackTag::kNone;
  if (name == "sign_flip") return AttackTag::kSignFlip;
  if (name == "gaussian") return AttackTag::kGaussian;
  if (name == "label_flip") return AttackTag::kLabelFlip;
  throw ConfigError("unknown attack kind: " + name);
}

std::string AttackTagName(AttackTag tag) {
  switch (tag) {
    case AttackTag::kNone:
      return "none";
    case AttackTag::kSignFlip:
      return "sign_flip";
    case AttackTag::kGaussian:
      return "gaussian";
    case AttackTag::kLabelFlip:
      return "label_flip";
  }
  throw ConfigError("unknown attack tag");
}

AdversaryRoster MakeRoster(int num_devices, IndexSet byzantine) {
  AdversaryRoster roster;
  std::sort(byzantine.begin(), byzantine.end());
  roster.flags.assign(num_devices, false);
  for (int k : byzantine) {
    if (k < 0 || k >= num_devices) throw ConfigError("roster index out of range");
    if (roster.flags[k]) throw ConfigError("duplicate roster index");
    roster.flags[k] = true;
  }
  if (static_cast<int>(byzantine.size()) >= num_devices && num_devices > 0) {
    throw ConfigError("need M < K");
  }
  roster.byzantine = std::move(byzantine);
  return roster;
}

AdversaryRoster SampleRoster(std::mt19937_64& rng, int num_devices, int count) {
  if (count < 0 || count >= num_devices) throw ConfigError("need 0 <= M < K");
  std::vector<int> order(num_devices);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return MakeRoster(num_devices, IndexSet(order.begin(), order.begin() + count));
}

std::vector<Vec> ApplyAttack(const AttackKind& kind,
                             std::span<const Vec> grads,
                             const AdversaryRoster& roster,
                             const AttackContext& context,
                             std::mt19937_64& rng) {
  std::vector<Vec> out(grads.begin(), grads.end());
  if (kind.tag == AttackTag::kNone || roster.byzantine.empty()) return out;

  switch (kind.tag) {
    case AttackTag::kSignFlip: {
      Vec honest_sum = Vec::Zero(grads.front().size());
      for (std::size_t k = 0; k < grads.size(); ++k) {
        if (!roster.is_byzantine(static_cast<int>(k))) honest_sum += grads[k];
      }
      for (int k : roster.byzantine) out[k] = -honest_sum;
      break;
    }
    case AttackTag::kGaussian: {
      std::normal_distribution<double> normal(kind.gaussian_mean,
                                              kind.gaussian_std);
      for (int k : roster.byzantine) {
        for (Eigen::Index j = 0; j < out[k].size(); ++j) out[k][j] = normal(rng);
      }
      break;
    }
    case AttackTag::kLabelFlip: {
      if (context.model == nullptr) {
        throw ConfigError("label_flip needs the model and local datasets");
      }
      for (int k : roster.byzantine) {
        const Dataset flipped = FlipLabels(context.datasets[k]);
        out[k] = LocalGradient(*context.model, context.batches[k], flipped);
      }
      break;
    }
    case AttackTag::kNone:
      break;
  }
  return out;
}

}  // namespace airfl
