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

#include "airfl/zta.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace airfl {

Vec NormalizeContributions(const Vec& gamma, std::span<const int> pool,
                           ContributionScale scale) {
  const Vec clamped = gamma.cwiseMax(0.0);
  double total = 0.0;
  for (int k : pool) total += clamped[k];
  const double n = static_cast<double>(pool.size());
  if (pool.empty() || total <= 0.0) {
    const double uniform = scale == ContributionScale::kMeanOne || n == 0.0
                               ? 1.0
                               : 1.0 / n;
    return Vec::Constant(gamma.size(), uniform);
  }
  const double denom = scale == ContributionScale::kMeanOne ? total / n : total;
  return clamped / denom;
}

void UpdateReputation(ReputationLedger& ledger, const Vec& alpha,
                      const Vec& gamma_bar,
                      std::span<const Participation> status,
                      double absence_penalty) {
  for (Eigen::Index k = 0; k < ledger.r.size(); ++k) {
    const double credit = alpha[k] * gamma_bar[k];
    switch (status[k]) {
      case Participation::kParticipated:
        ledger.r[k] += credit;
        break;
      case Participation::kExcluded:
        ledger.r[k] -= absence_penalty * credit;
        break;
      case Participation::kSilent:
        break;
    }
  }
}

IndexSet IdentifyByzantine(const ReputationLedger& ledger, int count) {
  const int k_total = static_cast<int>(ledger.r.size());
  if (count < 0 || count > k_total) throw ConfigError("bad Byzantine count");
  std::vector<int> order(k_total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return ledger.r[a] < ledger.r[b];
  });
  IndexSet out(order.begin(), order.begin() + count);
  std::sort(out.begin(), out.end());
  return out;
}

double SelectAbsencePenalty(double p_hat, double q_hat) {
  if (!(p_hat > 0.0 && p_hat <= 1.0) || !(q_hat >= 0.0 && q_hat < 1.0)) {
    throw ConfigError("p_hat must lie in (0,1] and q_hat in [0,1)");
  }
  if (p_hat <= q_hat) {
    throw ConfigError("p_hat <= q_hat: reputation cannot separate devices");
  }
  const double lower = (1.0 - p_hat) / p_hat;
  if (q_hat == 0.0) return 2.0 * lower + 1.0;
  const double upper = (1.0 - q_hat) / q_hat;
  if (lower == 0.0) return std::min(1.0, upper);
  return std::min(std::sqrt(lower * upper), upper);
}

void UpdateQueue(FairnessQueues& queues, const Vec& alpha,
                 const Vec& gamma_bar) {
  queues.q = (queues.q.array() + queues.target -
              gamma_bar.array() * alpha.array())
                 .cwiseMax(0.0);
}

void ExclusionTracker::Record(std::span<const int> members, bool excluded) {
  log_.push_back({IndexSet(members.begin(), members.end()), excluded});
}

ExclusionTracker::Estimate ExclusionTracker::Summarize(
    std::span<const int> suspects, int num_devices) const {
  std::vector<bool> suspect(num_devices, false);
  for (int k : suspects) suspect[k] = true;
  Estimate est;
  int suspect_excluded = 0;
  int clean_excluded = 0;
  for (const auto& obs : log_) {
    const bool touched = std::any_of(obs.members.begin(), obs.members.end(),
                                     [&](int k) { return suspect[k]; });
    if (touched) {
      ++est.suspect_clusters;
      suspect_excluded += obs.excluded;
    } else {
      ++est.clean_clusters;
      clean_excluded += obs.excluded;
    }
  }
  if (est.suspect_clusters > 0) {
    est.p_hat = static_cast<double>(suspect_excluded) / est.suspect_clusters;
  }
  if (est.clean_clusters > 0) {
    est.q_hat = static_cast<double>(clean_excluded) / est.clean_clusters;
  }
  return est;
}

}  // namespace airfl
