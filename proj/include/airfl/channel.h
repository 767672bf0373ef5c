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

#ifndef AIRFL_CHANNEL_H_
#define AIRFL_CHANNEL_H_

#include <complex>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "airfl/common.h"

namespace airfl {

using Complex = std::complex<double>;

// One round of fading. Immutable once sampled.
struct RoundChannel {
  std::vector<Complex> h;  // small-scale fading, CN(0, 1)
  Vec beta;                // large-scale amplitude gain
  double threshold = 0.0;  // truncation threshold on |h|
  IndexSet activated;      // {k : |h_k| >= threshold}, ascending

  int num_devices() const { return static_cast<int>(h.size()); }
  bool is_activated(int k) const { return std::abs(h[k]) >= threshold; }
  // |h_k| * beta_k
  double gain(int k) const { return std::abs(h[k]) * beta[k]; }
};

struct PowerConfig {
  double p_max = 1e-3;        // watts
  double clip_norm = 1.0;     // G
  double noise_power = 1e-6;  // sigma^2

  void Validate() const;
};

double DbmToWatts(double dbm);
double WattsToDbm(double watts);

RoundChannel SampleRoundChannel(std::mt19937_64& rng, const Vec& beta,
                                double threshold);

// beta_k = d_k^-1.1
Vec LargeScaleFading(const Vec& distances);

// Distances uniform in [near, far].
Vec SampleDistances(std::mt19937_64& rng, int count, double near, double far);

// zeta = (sqrt(P)/G) * min over activated members with alpha > 0 of
// |h| beta / alpha. Empty when no member qualifies (cluster inactive).
std::optional<double> ScalingFactor(std::span<const int> members,
                                    const RoundChannel& ch, const Vec& alpha,
                                    const PowerConfig& pc);

// rho_k = zeta alpha_k / (h_k beta_k); zero when truncated or alpha_k = 0.
Complex PreprocessFactor(int k, const RoundChannel& ch, const Vec& alpha,
                         double zeta);

}  // namespace airfl

#endif  // AIRFL_CHANNEL_H_
