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

#ifndef AIRFL_TESTS_WEIGHTING_INSTANCES_H_
#define AIRFL_TESTS_WEIGHTING_INSTANCES_H_

#include <numeric>
#include <random>

#include "airfl/weighting.h"

namespace airfl::testing_util {

// Credits and noise weights of comparable size, so that neither the linear
// credit nor the cluster noise dominates the optimum.
inline WeightingProblem RandomWeightingProblem(std::mt19937_64& rng, int devices,
                                               int surviving, int block) {
  std::uniform_real_distribution<double> credit(0.2, 2.0);
  std::uniform_real_distribution<double> log_noise(std::log(0.5), std::log(20.0));
  WeightingProblem prob;
  prob.devices.resize(devices);
  std::iota(prob.devices.begin(), prob.devices.end(), 0);
  prob.phi = Vec::NullaryExpr(devices, [&] { return credit(rng); });
  prob.varpi = Vec::NullaryExpr(devices, [&] { return std::exp(log_noise(rng)); });
  prob.cluster_size = block;
  prob.surviving_clusters = surviving;
  return prob;
}

}  // namespace airfl::testing_util

#endif  // AIRFL_TESTS_WEIGHTING_INSTANCES_H_
