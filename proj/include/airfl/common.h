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

#ifndef AIRFL_COMMON_H_
#define AIRFL_COMMON_H_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace airfl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IndexSet = std::vector<int>;

// Raised for invalid configuration values (unknown tags, inconsistent sizes).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a parameter violates an analytical precondition (e.g. eta >= 1/L).
class ParameterError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when a dataset cannot be split as requested.
class SizingError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Deterministic RNG stream derivation. Every random consumer in a run is fed
// from Stream(master, tag, a, b) so results do not depend on call order.
std::uint64_t SplitMix64(std::uint64_t x);

enum class StreamTag : std::uint64_t {
  kDistances = 1,
  kChannel = 2,
  kBatch = 3,
  kAttack = 4,
  kClusterNoise = 5,
  kRandomClustering = 6,
  kModelInit = 7,
  kPartition = 8,
  kRoster = 9,
  kDelta = 10,
  kTask = 11,
};

std::mt19937_64 Stream(std::uint64_t master, StreamTag tag, std::uint64_t a = 0,
                       std::uint64_t b = 0);

}  // namespace airfl

#endif  // AIRFL_COMMON_H_
