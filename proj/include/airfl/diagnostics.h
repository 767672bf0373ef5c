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

#ifndef AIRFL_DIAGNOSTICS_H_
#define AIRFL_DIAGNOSTICS_H_

#include <limits>
#include <random>
#include <span>
#include <vector>

#include "airfl/common.h"
#include "airfl/dataset.h"
#include "airfl/model.h"

namespace airfl {

// Per-device quantities of the participating set, all of equal length.
struct ParticipantTerms {
  Vec alpha;
  Vec grad_norm_sq;
  Vec delta;
};

// Upper bound on the expected one-round loss change:
//   -(eta/2) sum(alpha) |grad F|^2
//   - ((eta - L eta^2)/2) sum alpha (|g|^2 - delta^2/(1 - L eta))
//   + (L eta^2/2) noise.
double Lemma1Bound(const ParticipantTerms& s, double global_grad_sq,
                   double noise, double eta, double smoothness);

// 1 - mu eta sum(alpha).
double ContractionFactor(const Vec& alpha, double pl_constant, double eta);

// (eta/2) sum alpha delta^2 - ((eta - L eta^2)/2) sum alpha G^2
//   + (L eta^2/2) noise.
double OffsetTerm(const Vec& alpha, const Vec& delta, double clip_norm,
                  double noise, double eta, double smoothness);

// Same with each device's realised |g|^2 in place of G^2.
double RealizedOffsetTerm(const ParticipantTerms& s, double noise, double eta,
                          double smoothness);

// prod B (F0 - F*) + sum_{i<T-1} C_i prod_{j>i} B_j + C_{T-1}, for T equal
// to the trace length. T = 0 returns the initial gap.
double Theorem3Gap(std::span<const double> contraction,
                   std::span<const double> offset, double initial_gap);

// The bound for every prefix length 1..T.
std::vector<double> Theorem3GapTrace(std::span<const double> contraction,
                                     std::span<const double> offset,
                                     double initial_gap);

struct DeltaEstimateOptions {
  int batch_size = 0;  // 0 or >= shard size means the full shard
  int batches_per_checkpoint = 4;
  double margin = 0.1;
  // Deviations are measured on gradients clipped to this norm, as transmitted.
  double clip_norm = std::numeric_limits<double>::infinity();
};

// (1 + margin) times the largest |clip(g_k) - grad F| seen over the checkpoints
// and sampled batches, per device.
Vec EstimateDelta(const Model& model, std::span<const Vec> checkpoints,
                  std::span<const Dataset> partitions,
                  const DeltaEstimateOptions& options, std::mt19937_64& rng);

}  // namespace airfl

#endif  // AIRFL_DIAGNOSTICS_H_
