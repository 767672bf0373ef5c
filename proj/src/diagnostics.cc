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

#include "airfl/diagnostics.h"

#include <algorithm>

namespace airfl {
namespace {

void RequireStepBelowInverseSmoothness(double eta, double smoothness) {
  if (!(eta > 0.0) || smoothness * eta >= 1.0) {
    throw ParameterError("learning rate must satisfy 0 < eta < 1/L");
  }
}

void RequireSameLength(const ParticipantTerms& s) {
  if (s.alpha.size() != s.grad_norm_sq.size() ||
      s.alpha.size() != s.delta.size()) {
    throw ConfigError("participant vectors differ in length");
  }
}

}  // namespace

double Lemma1Bound(const ParticipantTerms& s, double global_grad_sq,
                   double noise, double eta, double smoothness) {
  RequireStepBelowInverseSmoothness(eta, smoothness);
  RequireSameLength(s);
  const double keep = 1.0 - smoothness * eta;
  const Vec contribution =
      s.grad_norm_sq - s.delta.cwiseProduct(s.delta) / keep;
  return -0.5 * eta * s.alpha.sum() * global_grad_sq -
         0.5 * eta * keep * s.alpha.dot(contribution) +
         0.5 * smoothness * eta * eta * noise;
}

double ContractionFactor(const Vec& alpha, double pl_constant, double eta) {
  return 1.0 - pl_constant * eta * alpha.sum();
}

double OffsetTerm(const Vec& alpha, const Vec& delta, double clip_norm,
                  double noise, double eta, double smoothness) {
  const double keep = 1.0 - smoothness * eta;
  return 0.5 * eta * alpha.dot(delta.cwiseProduct(delta)) -
         0.5 * eta * keep * alpha.sum() * clip_norm * clip_norm +
         0.5 * smoothness * eta * eta * noise;
}

double RealizedOffsetTerm(const ParticipantTerms& s, double noise, double eta,
                          double smoothness) {
  RequireSameLength(s);
  const double keep = 1.0 - smoothness * eta;
  return 0.5 * eta * s.alpha.dot(s.delta.cwiseProduct(s.delta)) -
         0.5 * eta * keep * s.alpha.dot(s.grad_norm_sq) +
         0.5 * smoothness * eta * eta * noise;
}

double Theorem3Gap(std::span<const double> contraction,
                   std::span<const double> offset, double initial_gap) {
  if (contraction.size() != offset.size()) {
    throw ConfigError("contraction and offset traces differ in length");
  }
  const std::size_t t = contraction.size();
  if (t == 0) return initial_gap;
  auto product = [&](std::size_t from) {
    double p = 1.0;
    for (std::size_t j = from; j < t; ++j) p *= contraction[j];
    return p;
  };
  double gap = product(0) * initial_gap;
  for (std::size_t i = 0; i + 1 < t; ++i) gap += offset[i] * product(i + 1);
  return gap + offset[t - 1];
}

std::vector<double> Theorem3GapTrace(std::span<const double> contraction,
                                     std::span<const double> offset,
                                     double initial_gap) {
  std::vector<double> out;
  out.reserve(contraction.size());
  for (std::size_t t = 1; t <= contraction.size(); ++t) {
    out.push_back(Theorem3Gap(contraction.first(t), offset.first(t),
                              initial_gap));
  }
  return out;
}

Vec EstimateDelta(const Model& model, std::span<const Vec> checkpoints,
                  std::span<const Dataset> partitions,
                  const DeltaEstimateOptions& options, std::mt19937_64& rng) {
  if (checkpoints.empty()) throw ConfigError("need at least one checkpoint");
  const int k_total = static_cast<int>(partitions.size());
  Vec worst = Vec::Zero(k_total);
  Model probe = model;
  for (const Vec& w : checkpoints) {
    probe.w = w;
    const Vec global = GlobalGradient(probe, partitions);
    for (int k = 0; k < k_total; ++k) {
      const int n = partitions[k].size();
      const bool full = options.batch_size <= 0 || options.batch_size >= n;
      const int draws = full ? 1 : options.batches_per_checkpoint;
      for (int b = 0; b < draws; ++b) {
        const Minibatch batch =
            full ? FullBatch(n) : DrawMinibatch(rng, n, options.batch_size);
        Vec g = LocalGradient(probe, batch, partitions[k]);
        if (std::isfinite(options.clip_norm)) g = ClipGradient(g, options.clip_norm);
        worst[k] = std::max(worst[k], (g - global).norm());
      }
    }
  }
  return (1.0 + options.margin) * worst;
}

}  // namespace airfl
