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

#include "airfl/dataset.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <numeric>

namespace airfl {
namespace {

std::uint32_t ReadBigEndian32(std::istream& in, const std::string& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw ConfigError("truncated IDX header in " + path);
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

std::vector<std::vector<int>> RowsByLabel(const Dataset& dataset) {
  std::vector<std::vector<int>> by_label(dataset.arity);
  for (int i = 0; i < dataset.size(); ++i) {
    by_label[dataset.labels[i]].push_back(i);
  }
  return by_label;
}

}  // namespace

Dataset Dataset::Subset(std::span<const int> rows) const {
  Dataset out;
  out.arity = arity;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
  }
  if (!labels.empty()) {
    out.labels.reserve(rows.size());
    for (int r : rows) out.labels.push_back(labels[r]);
  }
  if (targets.size() > 0) {
    out.targets.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.targets[static_cast<Eigen::Index>(i)] = targets[rows[i]];
    }
  }
  return out;
}

void Dataset::Validate() const {
  if (size() == 0) throw ConfigError("dataset is empty");
  if (is_regression()) {
    if (targets.size() != features.rows()) {
      throw ConfigError("regression targets do not match sample count");
    }
    return;
  }
  if (static_cast<int>(labels.size()) != size()) {
    throw ConfigError("label count does not match sample count");
  }
  for (int y : labels) {
    if (y < 0 || y >= arity) throw ConfigError("label outside [0, arity)");
  }
}

Minibatch DrawMinibatch(std::mt19937_64& rng, int dataset_size,
                        int batch_size) {
  Minibatch batch;
  if (batch_size >= dataset_size) return FullBatch(dataset_size);
  // Partial Fisher-Yates over an index table.
  std::vector<int> pool(dataset_size);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<int> pick(i, dataset_size - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  batch.indices.assign(pool.begin(), pool.begin() + batch_size);
  return batch;
}

Minibatch FullBatch(int dataset_size) {
  Minibatch batch;
  batch.indices.resize(dataset_size);
  std::iota(batch.indices.begin(), batch.indices.end(), 0);
  return batch;
}

std::vector<std::vector<int>> PartitionIndices(const Dataset& dataset,
                                               int num_devices,
                                               int labels_per_device,
                                               std::uint64_t seed) {
  if (dataset.size() == 0) throw SizingError("cannot partition an empty dataset");
  if (num_devices < 1) throw ConfigError("need at least one device");
  std::mt19937_64 rng = Stream(seed, StreamTag::kPartition);
  std::vector<std::vector<int>> shards(num_devices);

  if (dataset.is_regression()) {
    std::vector<int> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const int per_device = dataset.size() / num_devices;
    if (per_device == 0) {
      throw SizingError("dataset too small for requested device count");
    }
    for (int k = 0; k < num_devices; ++k) {
      shards[k].assign(order.begin() + k * per_device,
                       order.begin() + (k + 1) * per_device);
      std::sort(shards[k].begin(), shards[k].end());
    }
    return shards;
  }

  if (labels_per_device < 1 || labels_per_device > dataset.arity) {
    throw ConfigError("labels_per_device must be in [1, arity]");
  }
  // Slot (k, j) holds label (k * lpd + j) mod arity.
  std::vector<int> slots_per_label(dataset.arity, 0);
  for (int k = 0; k < num_devices; ++k) {
    for (int j = 0; j < labels_per_device; ++j) {
      ++slots_per_label[(k * labels_per_device + j) % dataset.arity];
    }
  }
  auto by_label = RowsByLabel(dataset);
  int chunk = std::numeric_limits<int>::max();
  for (int c = 0; c < dataset.arity; ++c) {
    if (slots_per_label[c] == 0) continue;
    chunk = std::min(chunk, static_cast<int>(by_label[c].size()) /
                                slots_per_label[c]);
  }
  if (chunk == 0) {
    throw SizingError("dataset too small: some label cannot give every "
                      "device holding it at least one sample");
  }
  for (auto& rows : by_label) std::shuffle(rows.begin(), rows.end(), rng);
  std::vector<int> next_chunk(dataset.arity, 0);
  for (int k = 0; k < num_devices; ++k) {
    for (int j = 0; j < labels_per_device; ++j) {
      const int c = (k * labels_per_device + j) % dataset.arity;
      const int start = next_chunk[c]++ * chunk;
      shards[k].insert(shards[k].end(), by_label[c].begin() + start,
                       by_label[c].begin() + start + chunk);
    }
    std::sort(shards[k].begin(), shards[k].end());
  }
  return shards;
}

std::vector<Dataset> PartitionNonIid(const Dataset& dataset, int num_devices,
                                     int labels_per_device,
                                     std::uint64_t seed) {
  std::vector<Dataset> out;
  for (const auto& rows :
       PartitionIndices(dataset, num_devices, labels_per_device, seed)) {
    out.push_back(dataset.Subset(rows));
  }
  return out;
}

std::pair<Dataset, Dataset> SplitRootDataset(const Dataset& dataset,
                                             int per_label,
                                             std::uint64_t seed) {
  std::mt19937_64 rng = Stream(seed, StreamTag::kPartition, 1);
  std::vector<int> root_rows;
  if (dataset.is_regression()) {
    std::vector<int> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const int take = std::min(dataset.size() - 1, per_label * 10);
    root_rows.assign(order.begin(), order.begin() + take);
  } else {
    auto by_label = RowsByLabel(dataset);
    for (auto& rows : by_label) {
      std::shuffle(rows.begin(), rows.end(), rng);
      if (static_cast<int>(rows.size()) <= per_label) {
        throw SizingError("not enough samples per label for the root set");
      }
      root_rows.insert(root_rows.end(), rows.begin(), rows.begin() + per_label);
    }
  }
  std::sort(root_rows.begin(), root_rows.end());
  std::vector<int> rest;
  std::size_t cursor = 0;
  for (int i = 0; i < dataset.size(); ++i) {
    if (cursor < root_rows.size() && root_rows[cursor] == i) {
      ++cursor;
    } else {
      rest.push_back(i);
    }
  }
  return {dataset.Subset(root_rows), dataset.Subset(rest)};
}

Dataset FlipLabels(const Dataset& dataset) {
  Dataset out = dataset;
  if (dataset.is_regression()) {
    out.targets = -dataset.targets;
  } else {
    for (int& y : out.labels) y = dataset.arity - 1 - y;
  }
  return out;
}

Dataset Concatenate(std::span<const Dataset> parts) {
  Dataset out;
  if (parts.empty()) return out;
  out.arity = parts.front().arity;
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.features.rows();
  out.features.resize(rows, parts.front().features.cols());
  if (out.arity == 0) out.targets.resize(rows);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.features.middleRows(at, p.features.rows()) = p.features;
    if (out.arity == 0) {
      out.targets.segment(at, p.targets.size()) = p.targets;
    } else {
      out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    }
    at += p.features.rows();
  }
  return out;
}

Dataset LoadIdx(const std::string& images_path, const std::string& labels_path,
                int max_samples) {
  std::ifstream images(images_path, std::ios::binary);
  std::ifstream labels(labels_path, std::ios::binary);
  if (!images) throw ConfigError("cannot open " + images_path);
  if (!labels) throw ConfigError("cannot open " + labels_path);
  if (ReadBigEndian32(images, images_path) != 0x00000803) {
    throw ConfigError("bad image magic in " + images_path);
  }
  if (ReadBigEndian32(labels, labels_path) != 0x00000801) {
    throw ConfigError("bad label magic in " + labels_path);
  }
  int count = static_cast<int>(ReadBigEndian32(images, images_path));
  const int rows = static_cast<int>(ReadBigEndian32(images, images_path));
  const int cols = static_cast<int>(ReadBigEndian32(images, images_path));
  const int label_count = static_cast<int>(ReadBigEndian32(labels, labels_path));
  if (label_count != count) throw ConfigError("IDX image/label count mismatch");
  if (max_samples >= 0) count = std::min(count, max_samples);

  Dataset out;
  out.arity = 10;
  out.features.resize(count, rows * cols);
  std::vector<unsigned char> pixels(static_cast<std::size_t>(rows) * cols);
  out.labels.resize(count);
  for (int i = 0; i < count; ++i) {
    if (!images.read(reinterpret_cast<char*>(pixels.data()),
                     static_cast<std::streamsize>(pixels.size()))) {
      throw ConfigError("truncated IDX image data in " + images_path);
    }
    for (int p = 0; p < rows * cols; ++p) {
      out.features(i, p) = pixels[p] / 255.0;
    }
    char label = 0;
    if (!labels.get(label)) throw ConfigError("truncated IDX label data");
    out.labels[i] = static_cast<unsigned char>(label);
  }
  int max_label = 0;
  for (int y : out.labels) max_label = std::max(max_label, y);
  out.arity = std::max(10, max_label + 1);
  out.Validate();
  return out;
}

Dataset MakeGaussianClassification(int samples, int feature_dim, int arity,
                                   double separation, std::uint64_t seed) {
  std::mt19937_64 rng = Stream(seed, StreamTag::kTask);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat centres(arity, feature_dim);
  for (int c = 0; c < arity; ++c) {
    for (int j = 0; j < feature_dim; ++j) centres(c, j) = normal(rng);
    centres.row(c) *= separation / centres.row(c).norm();
  }
  Dataset out;
  out.arity = arity;
  out.features.resize(samples, feature_dim);
  out.labels.resize(samples);
  for (int i = 0; i < samples; ++i) {
    const int c = i % arity;
    out.labels[i] = c;
    for (int j = 0; j < feature_dim; ++j) {
      out.features(i, j) = centres(c, j) + normal(rng);
    }
  }
  return out;
}

}  // namespace airfl
