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

#include "airfl/channel.h"

#include <cmath>
#include <limits>

namespace airfl {

void PowerConfig::Validate() const {
  if (!(p_max > 0.0)) throw ConfigError("p_max must be positive");
  if (!(clip_norm > 0.0)) throw ConfigError("clip norm G must be positive");
  if (noise_power < 0.0) throw ConfigError("noise power must be nonnegative");
}

double DbmToWatts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

double WattsToDbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

RoundChannel SampleRoundChannel(std::mt19937_64& rng, const Vec& beta,
                                double threshold) {
  if (beta.size() < 1) throw ConfigError("channel needs at least one device");
  // Real and imaginary parts each carry half the unit power.
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  RoundChannel ch;
  ch.beta = beta;
  ch.threshold = threshold;
  ch.h.resize(beta.size());
  for (auto& h : ch.h) {
    const double re = normal(rng);
    const double im = normal(rng);
    h = Complex(re, im);
  }
  for (int k = 0; k < ch.num_devices(); ++k) {
    if (ch.is_activated(k)) ch.activated.push_back(k);
  }
  return ch;
}

Vec LargeScaleFading(const Vec& distances) {
  Vec beta(distances.size());
  for (Eigen::Index k = 0; k < distances.size(); ++k) {
    if (!(distances[k] > 0.0)) throw ConfigError("distances must be positive");
    beta[k] = std::pow(distances[k], -1.1);
  }
  return beta;
}

Vec SampleDistances(std::mt19937_64& rng, int count, double near, double far) {
  if (!(near > 0.0) || far < near) throw ConfigError("bad distance range");
  std::uniform_real_distribution<double> uniform(near, far);
  Vec d(count);
  for (int k = 0; k < count; ++k) d[k] = uniform(rng);
  return d;
}

std::optional<double> ScalingFactor(std::span<const int> members,
                                    const RoundChannel& ch, const Vec& alpha,
                                    const PowerConfig& pc) {
  double best = std::numeric_limits<double>::infinity();
  for (int k : members) {
    if (!ch.is_activated(k) || !(alpha[k] > 0.0)) continue;
    best = std::min(best, ch.gain(k) / alpha[k]);
  }
  if (!std::isfinite(best)) return std::nullopt;
  // A relative backoff of 1e-12 keeps |rho g|^2 <= P_max after rounding.
  constexpr double kBackoff = 1.0 - 1e-12;
  return kBackoff * std::sqrt(pc.p_max) / pc.clip_norm * best;
}

Complex PreprocessFactor(int k, const RoundChannel& ch, const Vec& alpha,
                         double zeta) {
  if (!ch.is_activated(k) || !(alpha[k] > 0.0)) return {0.0, 0.0};
  return zeta * alpha[k] / (ch.h[k] * ch.beta[k]);
}

}  // namespace airfl
