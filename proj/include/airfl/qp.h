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

#ifndef AIRFL_QP_H_
#define AIRFL_QP_H_

#include <string>
#include <utility>
#include <vector>

#include "airfl/common.h"

namespace airfl {

// Sparse coefficient list: (variable, value).
using SparseRow = std::vector<std::pair<int, double>>;

// One symmetric quadratic entry. Off-diagonal entries are given once and
// mirrored internally.
struct QuadTerm {
  int row;
  int col;
  double value;
};

// 0.5 x'Qx + a'x <= rhs with Q positive semidefinite.
struct QuadConstraint {
  std::vector<QuadTerm> quad;
  SparseRow linear;
  double rhs = 0.0;
  std::string label;
};

struct LinearEquality {
  SparseRow linear;
  double rhs = 0.0;
  std::string label;
};

// Convex program with a quadratic objective and convex quadratic
// constraints:
//
//   minimize    0.5 x'Px + c'x
//   subject to  A x = b
//               0.5 x'Q_j x + a_j'x <= r_j
//               lower <= x <= upper
//
// Callers maximising a concave objective negate it.
struct QpProblem {
  int num_vars = 0;
  std::vector<QuadTerm> objective_quad;
  Vec objective_linear;
  std::vector<LinearEquality> equalities;
  std::vector<QuadConstraint> inequalities;
  Vec lower;  // -inf allowed
  Vec upper;  // +inf allowed
  std::vector<std::string> names;

  explicit QpProblem(int n = 0);
  int AddVariable(const std::string& name, double lo, double hi);

  double Objective(const Vec& x) const;
  double ConstraintValue(int j, const Vec& x) const;  // lhs - rhs
  // Largest violation over equalities, inequalities and bounds.
  double MaxViolation(const Vec& x) const;
  // Plain-text dump for cross-checking with an external solver.
  std::string Dump() const;
};

enum class QpStatus { kOptimal, kInfeasible, kIterationLimit };

struct QpOptions {
  double tolerance = 1e-7;
  int max_iterations = 200;
};

struct QpResult {
  QpStatus status = QpStatus::kIterationLimit;
  Vec x;
  Vec eq_duals;
  Vec ineq_duals;
  int iterations = 0;
  double kkt_residual = 0.0;
  double objective = 0.0;
  std::vector<std::string> violated;  // labels of violated constraints
};

// Primal-dual interior point with Mehrotra correction on the sparse
// quasi-definite KKT system. Never throws on infeasibility; the status and
// the violated set describe the failure.
QpResult SolveQp(const QpProblem& problem, const QpOptions& options = {},
                 const Vec* start = nullptr);

}  // namespace airfl

#endif  // AIRFL_QP_H_
