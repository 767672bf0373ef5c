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

#include "airfl/quadratic.h"

#include <Eigen/Eigenvalues>

namespace airfl {
namespace {

Dataset DrawRows(std::mt19937_64& rng, int rows, const Vec& optimum,
                 double target_noise) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset out;
  out.features.resize(rows, optimum.size());
  for (int i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < optimum.size(); ++j) {
      out.features(i, j) = normal(rng);
    }
  }
  out.targets = out.features * optimum;
  for (int i = 0; i < rows; ++i) out.targets[i] += target_noise * normal(rng);
  return out;
}

}  // namespace

double QuadraticTask::GlobalValue(const Vec& w) const {
  double total = 0.0;
  for (const auto& dev : devices) {
    total += 0.5 * (dev.features * w - dev.targets).squaredNorm() / dev.size();
  }
  return total / static_cast<double>(devices.size());
}

Vec QuadraticTask::GlobalGradientAt(const Vec& w) const {
  return hessian * w - linear;
}

QuadraticTask MakeQuadraticTask(const QuadraticTaskOptions& o) {
  if (o.dim < 1 || o.devices < 1 || o.rows_per_device < o.dim) {
    throw ConfigError("quadratic task needs rows_per_device >= dim >= 1");
  }
  std::mt19937_64 rng = Stream(o.seed, StreamTag::kTask, 7);
  std::normal_distribution<double> normal(0.0, 1.0);

  Vec centre(o.dim);
  for (int j = 0; j < o.dim; ++j) centre[j] = normal(rng);

  QuadraticTask task;
  task.local_optima.resize(o.devices);
  for (int k = 0; k < o.devices; k += 2) {
    Vec dir(o.dim);
    for (int j = 0; j < o.dim; ++j) dir[j] = normal(rng);
    dir *= o.heterogeneity / dir.norm();
    task.local_optima[k] = centre + dir;
    if (k + 1 < o.devices) task.local_optima[k + 1] = centre - dir;
  }
  if (o.devices % 2 == 1) task.local_optima.back() = centre;

  task.hessian = Mat::Zero(o.dim, o.dim);
  task.linear = Vec::Zero(o.dim);
  std::vector<Dataset> roots;
  std::vector<Dataset> tests;
  for (int k = 0; k < o.devices; ++k) {
    Dataset dev = DrawRows(rng, o.rows_per_device, task.local_optima[k],
                           o.target_noise);
    const Mat local_h = dev.features.transpose() * dev.features / dev.size();
    Eigen::SelfAdjointEigenSolver<Mat> eig(local_h, Eigen::EigenvaluesOnly);
    task.smoothness = std::max(task.smoothness, eig.eigenvalues().maxCoeff());
    task.hessian += local_h;
    task.linear += dev.features.transpose() * dev.targets / dev.size();
    task.devices.push_back(std::move(dev));
    roots.push_back(DrawRows(rng, o.root_rows_per_device,
                             task.local_optima[k], o.target_noise));
    tests.push_back(DrawRows(rng, o.test_rows_per_device,
                             task.local_optima[k], o.target_noise));
  }
  task.hessian /= o.devices;
  task.linear /= o.devices;
  Eigen::SelfAdjointEigenSolver<Mat> eig(task.hessian, Eigen::EigenvaluesOnly);
  task.pl_constant = eig.eigenvalues().minCoeff();
  task.w_star = task.hessian.ldlt().solve(task.linear);
  task.f_star = task.GlobalValue(task.w_star);
  task.root = Concatenate(roots);
  task.test = Concatenate(tests);
  return task;
}

}  // namespace airfl
