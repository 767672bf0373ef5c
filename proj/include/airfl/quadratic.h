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

#ifndef AIRFL_QUADRATIC_H_
#define AIRFL_QUADRATIC_H_

#include <cstdint>
#include <vector>

#include "airfl/common.h"
#include "airfl/dataset.h"

namespace airfl {

struct QuadraticTaskOptions {
  int dim = 20;
  int devices = 8;
  int rows_per_device = 40;
  int root_rows_per_device = 4;
  int test_rows_per_device = 10;
  // Distance of each local optimum from the common centre. Local optima are
  // placed in +/- pairs along random directions so the centre stays the
  // average.
  double heterogeneity = 1.0;
  double target_noise = 0.0;
  std::uint64_t seed = 1;
};

// Least-squares federation: device k minimises F_k(w) = |A_k w - b_k|^2/(2n).
// Smoothness L is the largest eigenvalue over the local Hessians A_k'A_k/n and
// mu is the smallest eigenvalue of their average, so both are exact.
struct QuadraticTask {
  std::vector<Dataset> devices;
  Dataset root;
  Dataset test;
  std::vector<Vec> local_optima;
  Mat hessian;  // average of the local Hessians
  Vec linear;   // average of A_k'b_k/n
  Vec w_star;
  double f_star = 0.0;
  double smoothness = 0.0;
  double pl_constant = 0.0;

  double GlobalValue(const Vec& w) const;
  Vec GlobalGradientAt(const Vec& w) const;
};

QuadraticTask MakeQuadraticTask(const QuadraticTaskOptions& options);

}  // namespace airfl

#endif  // AIRFL_QUADRATIC_H_
