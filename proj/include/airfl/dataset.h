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

#ifndef AIRFL_DATASET_H_
#define AIRFL_DATASET_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "airfl/common.h"

namespace airfl {

// A table of samples. Classification sets carry integer labels in
// [0, arity); regression sets carry real targets and arity 0.
struct Dataset {
  Mat features;             // one sample per row
  std::vector<int> labels;  // classification only
  Vec targets;              // regression only
  int arity = 0;

  int size() const { return static_cast<int>(features.rows()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
  bool is_regression() const { return arity == 0; }

  Dataset Subset(std::span<const int> rows) const;
  // Throws ConfigError when labels fall outside [0, arity) or sizes disagree.
  void Validate() const;
};

// Distinct row indices into one Dataset.
struct Minibatch {
  std::vector<int> indices;
  int batch_size() const { return static_cast<int>(indices.size()); }
};

// Draws min(batch_size, n) distinct indices uniformly without replacement.
Minibatch DrawMinibatch(std::mt19937_64& rng, int dataset_size, int batch_size);
Minibatch FullBatch(int dataset_size);

// Splits a classification dataset into K equally sized non-IID shards. Device
// k is assigned labels (k * labels_per_device + j) mod arity for
// j < labels_per_device, every shard holds the same number of samples of each
// of its labels, and leftovers are dropped. Regression sets are split into
// contiguous equal blocks after a seeded shuffle.
std::vector<Dataset> PartitionNonIid(const Dataset& dataset, int num_devices,
                                     int labels_per_device,
                                     std::uint64_t seed);

// Same as PartitionNonIid but returns the row indices of each shard.
std::vector<std::vector<int>> PartitionIndices(const Dataset& dataset,
                                               int num_devices,
                                               int labels_per_device,
                                               std::uint64_t seed);

// Pulls a small label-balanced sample out of `dataset`: per_label rows of
// every label (regression: per_label * 10 rows). Returns {root, remainder}.
std::pair<Dataset, Dataset> SplitRootDataset(const Dataset& dataset,
                                             int per_label, std::uint64_t seed);

// Returns a copy with every label x replaced by (arity - 1 - x); regression
// targets are negated.
Dataset FlipLabels(const Dataset& dataset);

Dataset Concatenate(std::span<const Dataset> parts);

// IDX files (big-endian). Images are scaled to [0, 1] and flattened.
Dataset LoadIdx(const std::string& images_path, const std::string& labels_path,
                int max_samples = -1);

// Gaussian class clusters: class c is centred at a random unit vector times
// `separation`, with identity covariance.
Dataset MakeGaussianClassification(int samples, int feature_dim, int arity,
                                   double separation, std::uint64_t seed);

}  // namespace airfl

#endif  // AIRFL_DATASET_H_
