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

#ifndef AIRFL_MODEL_H_
#define AIRFL_MODEL_H_

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "airfl/common.h"
#include "airfl/dataset.h"

namespace airfl {

enum class ArchitectureKind { kLinearSoftmax, kMlp, kLeastSquares };

std::string ArchitectureName(ArchitectureKind kind);

// A differentiable sample loss with a flat parameter vector. Loss and Gradient
// average over `rows` of `data`.
class Architecture {
 public:
  virtual ~Architecture() = default;

  virtual ArchitectureKind kind() const = 0;
  virtual int dimension() const = 0;

  virtual double Loss(const Vec& w, const Dataset& data,
                      std::span<const int> rows) const = 0;
  virtual Vec Gradient(const Vec& w, const Dataset& data,
                       std::span<const int> rows) const = 0;
  // Fraction of correctly classified rows; NaN for regression models.
  virtual double Accuracy(const Vec& w, const Dataset& data) const = 0;
  virtual Vec Initialize(std::mt19937_64& rng) const = 0;
};

// Multinomial logistic regression: logits = W x + b, W is classes x inputs.
class LinearSoftmax final : public Architecture {
 public:
  LinearSoftmax(int inputs, int classes);
  ArchitectureKind kind() const override {
    return ArchitectureKind::kLinearSoftmax;
  }
  int dimension() const override { return classes_ * (inputs_ + 1); }
  double Loss(const Vec& w, const Dataset& data,
              std::span<const int> rows) const override;
  Vec Gradient(const Vec& w, const Dataset& data,
               std::span<const int> rows) const override;
  double Accuracy(const Vec& w, const Dataset& data) const override;
  Vec Initialize(std::mt19937_64& rng) const override;

 private:
  Mat Logits(const Vec& w, const Mat& x) const;
  int inputs_;
  int classes_;
};

// inputs -> hidden (ReLU) -> classes (softmax). 784-30-10 has 23,860
// parameters.
class Mlp final : public Architecture {
 public:
  Mlp(int inputs, int hidden, int classes);
  ArchitectureKind kind() const override { return ArchitectureKind::kMlp; }
  int dimension() const override;
  double Loss(const Vec& w, const Dataset& data,
              std::span<const int> rows) const override;
  Vec Gradient(const Vec& w, const Dataset& data,
               std::span<const int> rows) const override;
  double Accuracy(const Vec& w, const Dataset& data) const override;
  Vec Initialize(std::mt19937_64& rng) const override;

 private:
  struct Forward {
    Mat pre_hidden;  // B x hidden
    Mat hidden;      // B x hidden, after ReLU
    Mat probs;       // B x classes
  };
  Forward Run(const Vec& w, const Mat& x) const;
  int inputs_;
  int hidden_;
  int classes_;
};

// Sample loss 0.5 * (a.w - y)^2 on regression data.
class LeastSquares final : public Architecture {
 public:
  explicit LeastSquares(int inputs);
  ArchitectureKind kind() const override {
    return ArchitectureKind::kLeastSquares;
  }
  int dimension() const override { return inputs_; }
  double Loss(const Vec& w, const Dataset& data,
              std::span<const int> rows) const override;
  Vec Gradient(const Vec& w, const Dataset& data,
               std::span<const int> rows) const override;
  double Accuracy(const Vec& w, const Dataset& data) const override;
  Vec Initialize(std::mt19937_64& rng) const override;

 private:
  int inputs_;
};

struct Model {
  std::shared_ptr<const Architecture> arch;
  Vec w;

  int dimension() const { return static_cast<int>(w.size()); }
  ArchitectureKind kind() const { return arch->kind(); }
};

Model MakeModel(std::shared_ptr<const Architecture> arch, std::mt19937_64& rng);

// Mean gradient of the sample loss over the batch rows.
Vec LocalGradient(const Model& model, const Minibatch& batch,
                  const Dataset& dataset);

// Rescales g onto the ball of radius max_norm. The returned norm never exceeds
// max_norm in floating point.
Vec ClipGradient(const Vec& g, double max_norm);

// Equal-weight average of the full-data local losses.
double GlobalLoss(const Model& model, std::span<const Dataset> partitions);

// Full-batch gradient of GlobalLoss.
Vec GlobalGradient(const Model& model, std::span<const Dataset> partitions);

// Central finite-difference gradient of the mean loss over rows; test oracle
// and diagnostics helper.
Vec FiniteDifferenceGradient(const Architecture& arch, const Vec& w,
                             const Dataset& data, std::span<const int> rows,
                             double step);

}  // namespace airfl

#endif  // AIRFL_MODEL_H_
