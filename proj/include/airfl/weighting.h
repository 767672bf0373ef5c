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

#ifndef AIRFL_WEIGHTING_H_
#define AIRFL_WEIGHTING_H_

#include <vector>

#include "airfl/common.h"
#include "airfl/qp.h"

namespace airfl {

// Expected loss-reduction credit of one device: |g|^2 - delta^2 / (1 - L eta).
// Throws ParameterError unless 0 < eta < 1/L.
double Contribution(double grad_norm_sq, double delta, double eta, double smoothness);

// Noise weight of one device under unit weighting factor:
//   V L eta sigma^2 G^2 / (2 (1 - L eta) P |h|^2 beta^2).
double NoiseWeight(double v, double smoothness, double eta, double noise_power,
                   double clip_norm, double p_max, double gain);

// One weighting instance over the activated, trusted device set. Vectors are
// indexed locally (position in `devices`).
struct WeightingProblem {
  std::vector<int> devices;  // global ids, for bookkeeping only
  Vec phi;                   // linear credit per device
  Vec varpi;                 // noise weight per device, >= 0
  int cluster_size = 1;
  int surviving_clusters = 1;

  int size() const { return static_cast<int>(phi.size()); }
  void Validate() const;
};

// Bilinear bounds of x*y around (x0, y0). lower <= xy <= upper, with
// equality at the expansion point.
double BilinearLower(double x, double y, double x0, double y0);
double BilinearUpper(double x, double y, double x0, double y0);

// Variable layout of the relaxed problem. Rows 0..real_rows-1 are clusters
// ordered from largest to smallest sqrt(varpi)*alpha. When there are more
// devices than surviving slots, one extra overflow row collects devices
// that must carry zero weight.
struct SurrogateLayout {
  int devices = 0;
  int rows = 0;
  int real_rows = 0;
  bool overflow = false;
  bool padded = false;          // last real row holds fewer than cluster_size
  std::vector<int> row_target;  // required device count per row
  double noise_scale = 1.0;     // max sqrt(varpi); u and l are stored in these units
  double objective_scale = 1.0;
  Vec w;                        // sqrt(varpi) / noise_scale

  int alpha(int k) const { return k; }
  int e(int i, int k) const { return devices + i * devices + k; }
  int u(int i) const { return devices * (1 + rows) + i; }
  int l(int i) const { return devices * (1 + rows) + real_rows + i; }
  int p_lower(int i, int k) const {
    return devices * (1 + rows) + 2 * real_rows + i * devices + k;
  }
  int p_upper(int i, int k) const {
    return devices * (1 + 2 * rows) + 2 * real_rows + i * devices + k;
  }
  // Elastic slack of the relaxed lower-bound rows, penalised like p.
  int elastic(int i, int k) const {
    return devices * (1 + 3 * rows) + 2 * real_rows + i * devices + k;
  }
  int num_vars() const { return devices * (1 + 3 * rows + real_rows) + 2 * real_rows; }
};

SurrogateLayout MakeLayout(const WeightingProblem& prob);

// Expansion point of the surrogate. u and l are in sqrt(varpi)*alpha units.
struct PccpIterate {
  Vec alpha;
  Mat e;  // rows x devices
  Vec u;
  Vec l;
};

// Binary starting point: trusted devices with the smallest credit fill the
// overflow row, the rest share uniform weight and are cut sequentially.
PccpIterate InitialIterate(const WeightingProblem& prob, const SurrogateLayout& layout);

// Convex surrogate around `at` with penalty `tau` (applied to the objective
// after division by layout.objective_scale). Minimisation form: its
// objective is minus the normalised concave surrogate.
QpProblem BuildSurrogate(const WeightingProblem& prob, const SurrogateLayout& layout,
                         const PccpIterate& at, double tau);

// Concave surrogate value at packed point `x`, in original objective units.
double SurrogateValue(const WeightingProblem& prob, const SurrogateLayout& layout,
                      const PccpIterate& at, const Vec& x, double tau);

// Packs a point in original units into the surrogate variable vector.
Vec PackPoint(const SurrogateLayout& layout, const Vec& alpha, const Mat& e,
              const Vec& u, const Vec& l, const Vec& p_lower, const Vec& p_upper);

// Sum of phi*alpha minus the largest varpi*alpha^2 of every listed cluster.
double PartitionObjective(const WeightingProblem& prob, const Vec& alpha,
                          const std::vector<IndexSet>& clusters);

// Sequential cut of the devices, largest sqrt(varpi)*alpha first, into the
// real rows of `layout`. Devices past the real rows are returned in
// `overflow` when it is non-null.
std::vector<IndexSet> SequentialRows(const WeightingProblem& prob,
                                     const SurrogateLayout& layout,
                                     const Vec& alpha, IndexSet* overflow = nullptr);

// Objective of alpha under its own sequential clustering.
double WeightingObjective(const WeightingProblem& prob, const Vec& alpha);

// Best alpha for a fixed assignment (convex). Devices in `zeroed` get 0.
Vec PolishWeights(const WeightingProblem& prob, const SurrogateLayout& layout,
                  const std::vector<IndexSet>& clusters, const IndexSet& zeroed,
                  const QpOptions& qp = {});

// Exact optimum of sum phi*alpha minus the cluster noise over the simplex
// for a fixed partition; devices outside every cluster carry zero weight.
// Requires varpi > 0 on the clustered devices.
double FixedPartitionOptimum(const WeightingProblem& prob,
                             const std::vector<IndexSet>& clusters);

// Partitions obtained by sorting devices on (phi - lambda) / sqrt(varpi) and
// cutting the order into the rows of `layout`, for every lambda between
// consecutive crossing points. Each entry lists the real rows followed by
// the overflow set when the layout has one.
std::vector<std::vector<IndexSet>> MultiplierSweepPartitions(
    const WeightingProblem& prob, const SurrogateLayout& layout);

struct PccpSchedule {
  double tau0 = 1.0;
  double growth = 3.0;
  double tau_max = 1e6;
  double chi = 1e-4;
  int max_iterations = 100;
  double relative_tolerance = 1e-6;
  // Also score the multiplier-sweep partitions and keep the best plan.
  bool structured_candidates = true;
  QpOptions qp;
};

struct WeightingSolution {
  Vec alpha;                       // local, sums to one
  Mat assignment;                  // binary, rows x devices
  std::vector<IndexSet> clusters;  // local indices, real rows only
  IndexSet overflow;
  Vec u;                           // sqrt(varpi)*alpha units
  Vec l;
  Vec slack;                       // p of the last relaxed solve
  std::vector<double> tau_trace;
  std::vector<double> slack_trace;      // ||p||_1 per iteration
  std::vector<double> elastic_trace;    // lower-bound slack per iteration
  std::vector<double> surrogate_trace;  // relaxed objective per iteration
  double relaxed_slack = 0.0;
  double objective = 0.0;               // exact objective of the returned alpha
  double pccp_objective = 0.0;          // same, for the rounded relaxation alone
  int iterations = 0;
  int qp_failures = 0;
  bool degraded = false;
};

WeightingSolution PccpOptimize(const WeightingProblem& prob,
                               const PccpSchedule& schedule = {});

}  // namespace airfl

#endif  // AIRFL_WEIGHTING_H_
