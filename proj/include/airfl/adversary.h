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

#ifndef AIRFL_ADVERSARY_H_
#define AIRFL_ADVERSARY_H_

#include <random>
#include <span>
#include <string>
#include <vector>

#include "airfl/common.h"
#include "airfl/dataset.h"
#include "airfl/model.h"

namespace airfl {

enum class AttackTag { kNone, kSignFlip, kGaussian, kLabelFlip };

AttackTag ParseAttackTag(const std::string& name);
std::string AttackTagName(AttackTag tag);

struct AttackKind {
  AttackTag tag = AttackTag::kNone;
  double gaussian_mean = 1.0;
  double gaussian_std = 1.0;
  // Byzantine devices ignore the cluster scaling factor and transmit a
  // phase-aligned signal at P_max. When false they precode like honest devices.
  bool full_power = true;
};

// Ground-truth Byzantine set. Only tests and metrics may compare defense
// output against it.
struct AdversaryRoster {
  IndexSet byzantine;  // ascending
  std::vector<bool> flags;

  bool is_byzantine(int k) const { return flags[k]; }
  int size() const { return static_cast<int>(byzantine.size()); }
};

AdversaryRoster MakeRoster(int num_devices, IndexSet byzantine);
// M distinct devices chosen uniformly.
AdversaryRoster SampleRoster(std::mt19937_64& rng, int num_devices, int count);

// What a label-flipping device needs to recompute its gradient.
struct AttackContext {
  const Model* model = nullptr;
  std::span<const Dataset> datasets;
  std::span<const Minibatch> batches;
};

// Returns a copy of `grads` (indexed by device) where every Byzantine entry is
// replaced by the attack vector. Honest entries are copied bit for bit.
std::vector<Vec> ApplyAttack(const AttackKind& kind,
                             std::span<const Vec> grads,
                             const AdversaryRoster& roster,
                             const AttackContext& context,
                             std::mt19937_64& rng);

}  // namespace airfl

#endif  // AIRFL_ADVERSARY_H_
