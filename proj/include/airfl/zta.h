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

#ifndef AIRFL_ZTA_H_
#define AIRFL_ZTA_H_

#include <span>
#include <vector>

#include "airfl/common.h"

namespace airfl {

// How a device fared in one round's aggregation.
enum class Participation {
  kParticipated,  // transmitted and its cluster survived the filter
  kExcluded,      // transmitted and its cluster was filtered out
  kSilent,        // truncated, zero weight or otherwise not heard
};

struct ReputationLedger {
  Vec r;
  explicit ReputationLedger(int num_devices = 0) : r(Vec::Zero(num_devices)) {}
};

struct FairnessQueues {
  Vec q;
  double target = 0.0;  // fairness target b
  FairnessQueues() = default;
  FairnessQueues(int num_devices, double fairness_target)
      : q(Vec::Zero(num_devices)), target(fairness_target) {}
};

enum class ContributionScale {
  kMeanOne,  // gamma+ / mean over the round's device set
  kSumOne,   // gamma+ / sum over the round's device set
};

// Normalised contributions for every device. The normaliser is taken over
// `pool` after clamping contributions at zero; when every pooled contribution
// is zero each device gets the uniform share.
Vec NormalizeContributions(const Vec& gamma, std::span<const int> pool,
                           ContributionScale scale);

// r_k += alpha_k gamma_bar_k * (1 | -penalty | 0).
void UpdateReputation(ReputationLedger& ledger, const Vec& alpha,
                      const Vec& gamma_bar,
                      std::span<const Participation> status,
                      double absence_penalty);

// The `count` devices with the smallest reputation, ties to the smaller
// index. Returned ascending by index.
IndexSet IdentifyByzantine(const ReputationLedger& ledger, int count);

// Geometric midpoint of ((1-p)/p, (1-q)/q]; 2(1-p)/p + 1 when q = 0 and 1
// when p = 1 and q = 0.
double SelectAbsencePenalty(double p_hat, double q_hat);

// q_k = max(q_k + b - gamma_bar_k alpha_k, 0).
void UpdateQueue(FairnessQueues& queues, const Vec& alpha, const Vec& gamma_bar);

// Exclusion statistics gathered during the initialisation rounds.
class ExclusionTracker {
 public:
  // One cluster observation: its transmitting members and whether the filter
  // removed it.
  void Record(std::span<const int> members, bool excluded);

  struct Estimate {
    double p_hat = 1.0;  // exclusion rate of clusters holding a suspect
    double q_hat = 0.0;  // exclusion rate of the other clusters
    int suspect_clusters = 0;
    int clean_clusters = 0;
  };
  Estimate Summarize(std::span<const int> suspects, int num_devices) const;

 private:
  struct Observation {
    IndexSet members;
    bool excluded;
  };
  std::vector<Observation> log_;
};

}  // namespace airfl

#endif  // AIRFL_ZTA_H_
