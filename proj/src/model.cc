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

#include "airfl/model.h"

#include <cmath>
#include <limits>

namespace airfl {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>;

Mat GatherRows(const Dataset& data, std::span<const int> rows) {
  Mat x(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);
  }
  return x;
}

std::vector<int> AllRows(const Dataset& data) {
  std::vector<int> rows(data.size());
  for (int i = 0; i < data.size(); ++i) rows[i] = i;
  return rows;
}

// Row-wise softmax, in place.
void Softmax(Mat& logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - top).exp();
    logits.row(i) /= logits.row(i).sum();
  }
}

double CrossEntropy(const Mat& probs, const Dataset& data,
                    std::span<const int> rows) {
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double p = probs(static_cast<Eigen::Index>(i), data.labels[rows[i]]);
    total -= std::log(std::max(p, 1e-300));
  }
  return total / static_cast<double>(rows.size());
}

// probs - onehot, divided by batch size.
Mat SoftmaxResidual(Mat probs, const Dataset& data, std::span<const int> rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    probs(static_cast<Eigen::Index>(i), data.labels[rows[i]]) -= 1.0;
  }
  return probs / static_cast<double>(rows.size());
}

double ArgmaxAccuracy(const Mat& scores, const Dataset& data) {
  int correct = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).maxCoeff(&best);
    if (best == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.rows());
}

}  // namespace

std::string ArchitectureName(ArchitectureKind kind) {
  switch (kind) {
    case ArchitectureKind::kLinearSoftmax:
      return "linear-softmax";
    case ArchitectureKind::kMlp:
      return "mlp";
    case ArchitectureKind::kLeastSquares:
      return "least-squares";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// LinearSoftmax. Layout: W (classes x inputs, row-major), then b (classes).

LinearSoftmax::LinearSoftmax(int inputs, int classes)
    : inputs_(inputs), classes_(classes) {
  if (inputs < 1 || classes < 2) throw ConfigError("bad linear-softmax shape");
}

Mat LinearSoftmax::Logits(const Vec& w, const Mat& x) const {
  Eigen::Map<const RowMat> weights(w.data(), classes_, inputs_);
  Eigen::Map<const Vec> bias(w.data() + classes_ * inputs_, classes_);
  Mat logits = x * weights.transpose();
  logits.rowwise() += bias.transpose();
  return logits;
}

double LinearSoftmax::Loss(const Vec& w, const Dataset& data,
                           std::span<const int> rows) const {
  Mat probs = Logits(w, GatherRows(data, rows));
  Softmax(probs);
  return CrossEntropy(probs, data, rows);
}

Vec LinearSoftmax::Gradient(const Vec& w, const Dataset& data,
                            std::span<const int> rows) const {
  const Mat x = GatherRows(data, rows);
  Mat probs = Logits(w, x);
  Softmax(probs);
  const Mat residual = SoftmaxResidual(std::move(probs), data, rows);
  Vec g(dimension());
  Eigen::Map<RowMat> grad_w(g.data(), classes_, inputs_);
  grad_w = residual.transpose() * x;
  g.tail(classes_) = residual.colwise().sum().transpose();
  return g;
}

double LinearSoftmax::Accuracy(const Vec& w, const Dataset& data) const {
  return ArgmaxAccuracy(Logits(w, data.features), data);
}

Vec LinearSoftmax::Initialize(std::mt19937_64& /*rng*/) const {
  return Vec::Zero(dimension());
}

// ---------------------------------------------------------------------------
// Mlp. Layout: W1 (hidden x inputs), b1, W2 (classes x hidden), b2.

Mlp::Mlp(int inputs, int hidden, int classes)
    : inputs_(inputs), hidden_(hidden), classes_(classes) {
  if (inputs < 1 || hidden < 1 || classes < 2) {
    throw ConfigError("bad mlp shape");
  }
}

int Mlp::dimension() const {
  return hidden_ * (inputs_ + 1) + classes_ * (hidden_ + 1);
}

Mlp::Forward Mlp::Run(const Vec& w, const Mat& x) const {
  const double* p = w.data();
  Eigen::Map<const RowMat> w1(p, hidden_, inputs_);
  p += hidden_ * inputs_;
  Eigen::Map<const Vec> b1(p, hidden_);
  p += hidden_;
  Eigen::Map<const RowMat> w2(p, classes_, hidden_);
  p += classes_ * hidden_;
  Eigen::Map<const Vec> b2(p, classes_);

  Forward f;
  f.pre_hidden = x * w1.transpose();
  f.pre_hidden.rowwise() += b1.transpose();
  f.hidden = f.pre_hidden.cwiseMax(0.0);
  f.probs = f.hidden * w2.transpose();
  f.probs.rowwise() += b2.transpose();
  Softmax(f.probs);
  return f;
}

double Mlp::Loss(const Vec& w, const Dataset& data,
                 std::span<const int> rows) const {
  return CrossEntropy(Run(w, GatherRows(data, rows)).probs, data, rows);
}

Vec Mlp::Gradient(const Vec& w, const Dataset& data,
                  std::span<const int> rows) const {
  const Mat x = GatherRows(data, rows);
  Forward f = Run(w, x);
  const Mat d_out = SoftmaxResidual(std::move(f.probs), data, rows);
  Eigen::Map<const RowMat> w2(w.data() + hidden_ * (inputs_ + 1), classes_,
                              hidden_);
  Mat d_hidden = d_out * w2;
  d_hidden.array() *= (f.pre_hidden.array() > 0.0).cast<double>();

  Vec g(dimension());
  double* p = g.data();
  Eigen::Map<RowMat>(p, hidden_, inputs_) = d_hidden.transpose() * x;
  p += hidden_ * inputs_;
  Eigen::Map<Vec>(p, hidden_) = d_hidden.colwise().sum().transpose();
  p += hidden_;
  Eigen::Map<RowMat>(p, classes_, hidden_) = d_out.transpose() * f.hidden;
  p += classes_ * hidden_;
  Eigen::Map<Vec>(p, classes_) = d_out.colwise().sum().transpose();
  return g;
}

double Mlp::Accuracy(const Vec& w, const Dataset& data) const {
  return ArgmaxAccuracy(Run(w, data.features).probs, data);
}

Vec Mlp::Initialize(std::mt19937_64& rng) const {
  Vec w = Vec::Zero(dimension());
  std::normal_distribution<double> normal(0.0, 1.0);
  const double s1 = std::sqrt(2.0 / inputs_);
  const double s2 = std::sqrt(2.0 / hidden_);
  for (int i = 0; i < hidden_ * inputs_; ++i) w[i] = s1 * normal(rng);
  const int w2_at = hidden_ * (inputs_ + 1);
  for (int i = 0; i < classes_ * hidden_; ++i) w[w2_at + i] = s2 * normal(rng);
  return w;
}

// ---------------------------------------------------------------------------
// LeastSquares.

LeastSquares::LeastSquares(int inputs) : inputs_(inputs) {
  if (inputs < 1) throw ConfigError("bad least-squares shape");
}

double LeastSquares::Loss(const Vec& w, const Dataset& data,
                          std::span<const int> rows) const {
  double total = 0.0;
  for (int r : rows) {
    const double e = data.features.row(r).dot(w) - data.targets[r];
    total += 0.5 * e * e;
  }
  return total / static_cast<double>(rows.size());
}

Vec LeastSquares::Gradient(const Vec& w, const Dataset& data,
                           std::span<const int> rows) const {
  Vec g = Vec::Zero(inputs_);
  for (int r : rows) {
    const double e = data.features.row(r).dot(w) - data.targets[r];
    g += e * data.features.row(r).transpose();
  }
  return g / static_cast<double>(rows.size());
}

double LeastSquares::Accuracy(const Vec& /*w*/, const Dataset& /*data*/) const {
  return std::numeric_limits<double>::quiet_NaN();
}

Vec LeastSquares::Initialize(std::mt19937_64& /*rng*/) const {
  return Vec::Zero(inputs_);
}

// ---------------------------------------------------------------------------

Model MakeModel(std::shared_ptr<const Architecture> arch,
                std::mt19937_64& rng) {
  Model m;
  m.w = arch->Initialize(rng);
  m.arch = std::move(arch);
  return m;
}

Vec LocalGradient(const Model& model, const Minibatch& batch,
                  const Dataset& dataset) {
  return model.arch->Gradient(model.w, dataset, batch.indices);
}

Vec ClipGradient(const Vec& g, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("clip bound must be positive");
  const double norm = g.norm();
  if (norm <= max_norm) return g;
  Vec out = g * (max_norm / norm);
  // Rounding can leave the rescaled norm one ulp above the bound.
  while (out.norm() > max_norm) out *= (1.0 - 1e-15);
  return out;
}

double GlobalLoss(const Model& model, std::span<const Dataset> partitions) {
  double total = 0.0;
  for (const auto& part : partitions) {
    total += model.arch->Loss(model.w, part, AllRows(part));
  }
  return total / static_cast<double>(partitions.size());
}

Vec GlobalGradient(const Model& model, std::span<const Dataset> partitions) {
  Vec total = Vec::Zero(model.dimension());
  for (const auto& part : partitions) {
    total += model.arch->Gradient(model.w, part, AllRows(part));
  }
  return total / static_cast<double>(partitions.size());
}

Vec FiniteDifferenceGradient(const Architecture& arch, const Vec& w,
                             const Dataset& data, std::span<const int> rows,
                             double step) {
  Vec g(w.size());
  Vec probe = w;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    probe[i] = w[i] + step;
    const double up = arch.Loss(probe, data, rows);
    probe[i] = w[i] - step;
    const double down = arch.Loss(probe, data, rows);
    probe[i] = w[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace airfl
