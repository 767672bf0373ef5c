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

#include "airfl/weighting.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace airfl {

double Contribution(double grad_norm_sq, double delta, double eta,
                    double smoothness) {
  if (!(eta > 0.0) || !(smoothness >= 0.0) || smoothness * eta >= 1.0) {
    throw ParameterError("learning rate must satisfy 0 < eta < 1/L");
  }
  return grad_norm_sq - delta * delta / (1.0 - smoothness * eta);
}

double NoiseWeight(double v, double smoothness, double eta, double noise_power,
                   double clip_norm, double p_max, double gain) {
  if (smoothness * eta >= 1.0) {
    throw ParameterError("learning rate must satisfy eta < 1/L");
  }
  return v * smoothness * eta * noise_power * clip_norm * clip_norm /
         (2.0 * (1.0 - smoothness * eta) * p_max * gain * gain);
}

void WeightingProblem::Validate() const {
  if (phi.size() != varpi.size()) throw ConfigError("phi/varpi size mismatch");
  if (!devices.empty() && static_cast<int>(devices.size()) != size()) {
    throw ConfigError("device list size mismatch");
  }
  if (size() == 0) throw ConfigError("empty weighting problem");
  if (cluster_size < 1 || surviving_clusters < 1) {
    throw ConfigError("cluster size and surviving clusters must be positive");
  }
  if ((varpi.array() < 0.0).any() || !varpi.allFinite() || !phi.allFinite()) {
    throw ParameterError("noise weights must be finite and nonnegative");
  }
}

double BilinearLower(double x, double y, double x0, double y0) {
  const double s0 = x0 + y0;
  const double d = x - y;
  return 0.5 * s0 * (x + y) - 0.25 * s0 * s0 - 0.25 * d * d;
}

double BilinearUpper(double x, double y, double x0, double y0) {
  const double s = x + y;
  const double d0 = x0 - y0;
  return 0.25 * s * s - 0.5 * d0 * (x - y) + 0.25 * d0 * d0;
}

SurrogateLayout MakeLayout(const WeightingProblem& prob) {
  prob.Validate();
  SurrogateLayout out;
  const int n = prob.size();
  const int kbar = prob.cluster_size;
  out.devices = n;
  out.real_rows = std::min(prob.surviving_clusters, (n + kbar - 1) / kbar);
  const int slots = out.real_rows * kbar;
  out.row_target.assign(out.real_rows, kbar);
  if (n < slots) {
    out.padded = true;
    out.row_target.back() = n - (out.real_rows - 1) * kbar;
  }
  out.overflow = n > slots;
  out.rows = out.real_rows + (out.overflow ? 1 : 0);
  if (out.overflow) out.row_target.push_back(n - slots);

  const double max_varpi = prob.varpi.maxCoeff();
  out.noise_scale = max_varpi > 0.0 ? std::sqrt(max_varpi) : 1.0;
  out.w = prob.varpi.cwiseSqrt() / out.noise_scale;
  const double scale = std::max(prob.phi.cwiseAbs().maxCoeff(), max_varpi);
  out.objective_scale = scale > 0.0 ? scale : 1.0;
  return out;
}

std::vector<IndexSet> SequentialRows(const WeightingProblem& prob,
                                     const SurrogateLayout& layout,
                                     const Vec& alpha, IndexSet* overflow) {
  const int n = prob.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return layout.w[a] * alpha[a] > layout.w[b] * alpha[b];
  });
  std::vector<IndexSet> rows(layout.real_rows);
  int pos = 0;
  for (int i = 0; i < layout.real_rows; ++i) {
    for (int t = 0; t < layout.row_target[i]; ++t) rows[i].push_back(order[pos++]);
    std::sort(rows[i].begin(), rows[i].end());
  }
  if (overflow != nullptr) {
    overflow->assign(order.begin() + pos, order.end());
    std::sort(overflow->begin(), overflow->end());
  }
  return rows;
}

double PartitionObjective(const WeightingProblem& prob, const Vec& alpha,
                          const std::vector<IndexSet>& clusters) {
  double value = 0.0;
  for (const auto& c : clusters) {
    double worst = 0.0;
    for (int k : c) {
      value += prob.phi[k] * alpha[k];
      worst = std::max(worst, prob.varpi[k] * alpha[k] * alpha[k]);
    }
    value -= worst;
  }
  return value;
}

double WeightingObjective(const WeightingProblem& prob, const Vec& alpha) {
  const SurrogateLayout layout = MakeLayout(prob);
  return PartitionObjective(prob, alpha, SequentialRows(prob, layout, alpha));
}

PccpIterate InitialIterate(const WeightingProblem& prob,
                           const SurrogateLayout& layout) {
  const int n = prob.size();
  PccpIterate it;
  it.alpha = Vec::Zero(n);
  it.e = Mat::Zero(layout.rows, n);
  std::vector<bool> parked(n, false);
  if (layout.overflow) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return prob.phi[a] < prob.phi[b]; });
    for (int t = 0; t < layout.row_target.back(); ++t) {
      parked[order[t]] = true;
      it.e(layout.real_rows, order[t]) = 1.0;
    }
  }
  const int active = n - (layout.overflow ? layout.row_target.back() : 0);
  for (int k = 0; k < n; ++k) {
    if (!parked[k]) it.alpha[k] = 1.0 / active;
  }
  // Parked devices carry zero weight, so the sequential cut leaves them last.
  const auto rows = SequentialRows(prob, layout, it.alpha);
  it.u = Vec::Zero(layout.real_rows);
  it.l = Vec::Zero(layout.real_rows);
  for (int i = 0; i < layout.real_rows; ++i) {
    double hi = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (int k : rows[i]) {
      it.e(i, k) = 1.0;
      const double v = std::sqrt(prob.varpi[k]) * it.alpha[k];
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    it.u[i] = hi;
    it.l[i] = (layout.padded && i == layout.real_rows - 1) ? 0.0 : lo;
  }
  return it;
}

Vec PackPoint(const SurrogateLayout& layout, const Vec& alpha, const Mat& e,
              const Vec& u, const Vec& l, const Vec& p_lower, const Vec& p_upper) {
  Vec x = Vec::Zero(layout.num_vars());
  const int n = layout.devices;
  for (int k = 0; k < n; ++k) x[layout.alpha(k)] = alpha[k];
  for (int i = 0; i < layout.rows; ++i) {
    for (int k = 0; k < n; ++k) {
      x[layout.e(i, k)] = e(i, k);
      x[layout.p_lower(i, k)] = p_lower.size() ? p_lower[i * n + k] : 0.0;
      x[layout.p_upper(i, k)] = p_upper.size() ? p_upper[i * n + k] : 0.0;
    }
  }
  for (int i = 0; i < layout.real_rows; ++i) {
    x[layout.u(i)] = u[i] / layout.noise_scale;
    x[layout.l(i)] = l[i] / layout.noise_scale;
  }
  return x;
}

QpProblem BuildSurrogate(const WeightingProblem& prob, const SurrogateLayout& layout,
                         const PccpIterate& at, double tau) {
  const int n = layout.devices;
  const double s = layout.objective_scale;
  const double zeta2 = layout.noise_scale * layout.noise_scale;

  QpProblem qp(layout.num_vars());
  for (int k = 0; k < n; ++k) {
    qp.names[layout.alpha(k)] = "alpha" + std::to_string(k);
    qp.lower[layout.alpha(k)] = 0.0;
    qp.upper[layout.alpha(k)] = 1.0;
  }
  for (int i = 0; i < layout.rows; ++i) {
    for (int k = 0; k < n; ++k) {
      const std::string tag = std::to_string(i) + "_" + std::to_string(k);
      qp.names[layout.e(i, k)] = "e" + tag;
      qp.lower[layout.e(i, k)] = 0.0;
      qp.upper[layout.e(i, k)] = 1.0;
      qp.names[layout.p_lower(i, k)] = "plo" + tag;
      qp.lower[layout.p_lower(i, k)] = 0.0;
      qp.names[layout.p_upper(i, k)] = "pup" + tag;
      qp.lower[layout.p_upper(i, k)] = 0.0;
      qp.objective_linear[layout.p_lower(i, k)] = tau;
      qp.objective_linear[layout.p_upper(i, k)] = tau;
    }
  }
  for (int i = 0; i < layout.real_rows; ++i) {
    for (int k = 0; k < n; ++k) {
      const int q = layout.elastic(i, k);
      qp.names[q] = "q" + std::to_string(i) + "_" + std::to_string(k);
      qp.lower[q] = 0.0;
      const bool pad_row = layout.padded && i == layout.real_rows - 1;
      qp.upper[q] = pad_row ? 0.0 : std::numeric_limits<double>::infinity();
      qp.objective_linear[q] = tau;
    }
    qp.names[layout.u(i)] = "u" + std::to_string(i);
    qp.names[layout.l(i)] = "l" + std::to_string(i);
    qp.lower[layout.u(i)] = 0.0;
    qp.lower[layout.l(i)] = 0.0;
    if (layout.padded && i == layout.real_rows - 1) qp.upper[layout.l(i)] = 0.0;
    qp.objective_quad.push_back({layout.u(i), layout.u(i), 2.0 * zeta2 / s});
  }

  // Credit term: phi*L for phi >= 0 and phi*U for phi < 0 keep it concave.
  for (int i = 0; i < layout.real_rows; ++i) {
    for (int k = 0; k < n; ++k) {
      const int a = layout.alpha(k);
      const int e = layout.e(i, k);
      const double phi = prob.phi[k] / s;
      const double a0 = at.alpha[k];
      const double e0 = at.e(i, k);
      if (phi >= 0.0) {
        qp.objective_quad.push_back({a, a, 0.5 * phi});
        qp.objective_quad.push_back({e, e, 0.5 * phi});
        qp.objective_quad.push_back({a, e, -0.5 * phi});
        qp.objective_linear[a] -= 0.5 * phi * (a0 + e0);
        qp.objective_linear[e] -= 0.5 * phi * (a0 + e0);
      } else {
        const double c = -phi;
        qp.objective_quad.push_back({a, a, 0.5 * c});
        qp.objective_quad.push_back({e, e, 0.5 * c});
        qp.objective_quad.push_back({a, e, 0.5 * c});
        qp.objective_linear[a] += 0.5 * phi * (a0 - e0);
        qp.objective_linear[e] -= 0.5 * phi * (a0 - e0);
      }
    }
  }

  SparseRow simplex;
  for (int k = 0; k < n; ++k) simplex.emplace_back(layout.alpha(k), 1.0);
  qp.equalities.push_back({simplex, 1.0, "sum alpha"});
  for (int k = 0; k < n; ++k) {
    SparseRow row;
    for (int i = 0; i < layout.rows; ++i) row.emplace_back(layout.e(i, k), 1.0);
    qp.equalities.push_back({row, 1.0, "one cluster " + std::to_string(k)});
  }
  // The last size row is implied by the others and would make the
  // equality block rank deficient.
  for (int i = 0; i + 1 < layout.rows; ++i) {
    SparseRow row;
    for (int k = 0; k < n; ++k) row.emplace_back(layout.e(i, k), 1.0);
    qp.equalities.push_back({row, static_cast<double>(layout.row_target[i]),
                             "cluster size " + std::to_string(i)});
  }

  for (int i = 0; i < layout.real_rows; ++i) {
    const bool pad_row = layout.padded && i == layout.real_rows - 1;
    const double l0 = at.l[i] / layout.noise_scale;
    for (int k = 0; k < n; ++k) {
      const std::string tag = std::to_string(i) + "_" + std::to_string(k);
      const int a = layout.alpha(k);
      const int e = layout.e(i, k);
      const double w = layout.w[k];
      const double e0 = at.e(i, k);
      if (w > 0.0) {
        const double d0 = at.alpha[k] - e0;
        QuadConstraint upper;
        upper.quad = {{a, a, 0.5 * w}, {e, e, 0.5 * w}, {a, e, 0.5 * w}};
        upper.linear = {{a, -0.5 * w * d0}, {e, 0.5 * w * d0}, {layout.u(i), -1.0}};
        upper.rhs = -0.25 * w * d0 * d0;
        upper.label = "max bound " + tag;
        qp.inequalities.push_back(std::move(upper));
      }
      if (!pad_row) {
        const int lv = layout.l(i);
        const double d0 = l0 - e0;
        QuadConstraint lower;
        lower.quad = {{lv, lv, 0.5}, {e, e, 0.5}, {lv, e, 0.5}};
        lower.linear = {{lv, -0.5 * d0}, {e, 0.5 * d0}, {a, -w},
                        {layout.elastic(i, k), -1.0}};
        lower.rhs = -0.25 * d0 * d0;
        lower.label = "min bound " + tag;
        qp.inequalities.push_back(std::move(lower));
      }
    }
  }
  for (int i = 1; i < layout.real_rows; ++i) {
    QuadConstraint order;
    order.linear = {{layout.u(i), 1.0}, {layout.l(i - 1), -1.0}};
    order.label = "ordering " + std::to_string(i);
    qp.inequalities.push_back(std::move(order));
  }
  for (int i = 0; i < layout.rows; ++i) {
    for (int k = 0; k < n; ++k) {
      const std::string tag = std::to_string(i) + "_" + std::to_string(k);
      const int e = layout.e(i, k);
      const double e0 = at.e(i, k);
      QuadConstraint concave;
      concave.quad = {{e, e, 2.0}};
      concave.linear = {{e, -1.0}, {layout.p_lower(i, k), -1.0}};
      concave.label = "binary lower " + tag;
      qp.inequalities.push_back(std::move(concave));
      QuadConstraint linearized;
      linearized.linear = {{e, -(2.0 * e0 - 1.0)}, {layout.p_upper(i, k), -1.0}};
      linearized.rhs = -e0 * e0;
      linearized.label = "binary upper " + tag;
      qp.inequalities.push_back(std::move(linearized));
    }
  }
  if (layout.overflow) {
    for (int k = 0; k < n; ++k) {
      QuadConstraint park;
      park.linear = {{layout.alpha(k), 1.0}, {layout.e(layout.real_rows, k), 1.0}};
      park.rhs = 1.0;
      park.label = "parked " + std::to_string(k);
      qp.inequalities.push_back(std::move(park));
    }
  }
  return qp;
}

double SurrogateValue(const WeightingProblem& prob, const SurrogateLayout& layout,
                      const PccpIterate& at, const Vec& x, double tau) {
  const int n = layout.devices;
  const double s = layout.objective_scale;
  double value = 0.0;
  for (int i = 0; i < layout.real_rows; ++i) {
    for (int k = 0; k < n; ++k) {
      const double a = x[layout.alpha(k)];
      const double e = x[layout.e(i, k)];
      const double bound = prob.phi[k] >= 0.0
                               ? BilinearLower(a, e, at.alpha[k], at.e(i, k))
                               : BilinearUpper(a, e, at.alpha[k], at.e(i, k));
      value += prob.phi[k] * bound;
    }
    const double u = x[layout.u(i)] * layout.noise_scale;
    value -= u * u;
  }
  double slack = 0.0;
  for (int i = 0; i < layout.rows; ++i) {
    for (int k = 0; k < n; ++k) {
      slack += x[layout.p_lower(i, k)] + x[layout.p_upper(i, k)];
      if (i < layout.real_rows) slack += x[layout.elastic(i, k)];
    }
  }
  return value - s * tau * slack;
}

Vec PolishWeights(const WeightingProblem& prob, const SurrogateLayout& layout,
                  const std::vector<IndexSet>& clusters, const IndexSet& zeroed,
                  const QpOptions& options) {
  const int n = prob.size();
  const int rows = static_cast<int>(clusters.size());
  const double s = layout.objective_scale;
  const double zeta2 = layout.noise_scale * layout.noise_scale;
  QpProblem qp(n + rows);
  for (int k = 0; k < n; ++k) {
    qp.names[k] = "alpha" + std::to_string(k);
    qp.lower[k] = 0.0;
    qp.upper[k] = 1.0;
    qp.objective_linear[k] = -prob.phi[k] / s;
  }
  for (int k : zeroed) qp.upper[k] = 0.0;
  SparseRow simplex;
  for (int k = 0; k < n; ++k) simplex.emplace_back(k, 1.0);
  qp.equalities.push_back({simplex, 1.0, "sum alpha"});
  for (int i = 0; i < rows; ++i) {
    const int u = n + i;
    qp.names[u] = "u" + std::to_string(i);
    qp.lower[u] = 0.0;
    qp.objective_quad.push_back({u, u, 2.0 * zeta2 / s});
    for (int k : clusters[i]) {
      if (layout.w[k] <= 0.0) continue;
      QuadConstraint c;
      c.linear = {{k, layout.w[k]}, {u, -1.0}};
      c.label = "max bound " + std::to_string(i) + "_" + std::to_string(k);
      qp.inequalities.push_back(std::move(c));
    }
  }
  const QpResult res = SolveQp(qp, options);
  Vec alpha = res.x.head(n).cwiseMax(0.0);
  for (int k : zeroed) alpha[k] = 0.0;
  const double total = alpha.sum();
  if (!(total > 0.0) || !alpha.allFinite()) {
    alpha = Vec::Zero(n);
    int free = 0;
    for (const auto& c : clusters) free += static_cast<int>(c.size());
    for (const auto& c : clusters) {
      for (int k : c) alpha[k] = 1.0 / free;
    }
    return alpha;
  }
  return alpha / total;
}

double FixedPartitionOptimum(const WeightingProblem& prob,
                             const std::vector<IndexSet>& clusters) {
  // Dual in the simplex multiplier lam:
  //   g(lam) = lam + sum_i S_i(lam)^2 / 4,
  //   S_i(lam) = sum_{k in C_i} max(phi_k - lam, 0) / sqrt(varpi_k),
  // a convex piecewise quadratic with kinks at the phi values.
  struct Item {
    double phi;
    double inv_root;
    int cluster;
  };
  std::vector<Item> items;
  for (int i = 0; i < static_cast<int>(clusters.size()); ++i) {
    for (int k : clusters[i]) {
      if (!(prob.varpi[k] > 0.0)) {
        throw ParameterError("exact partition value needs positive noise weights");
      }
      items.push_back({prob.phi[k], 1.0 / std::sqrt(prob.varpi[k]), i});
    }
  }
  if (items.empty()) return -std::numeric_limits<double>::infinity();
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.phi > b.phi; });
  // Walk lam downward from the largest credit, adding devices as they turn
  // active. On each segment S_i = a_i - b_i lam.
  const int c = static_cast<int>(clusters.size());
  std::vector<double> a(c, 0.0), b(c, 0.0);
  double best = items.front().phi;  // g at lam = max phi, nothing active
  std::size_t next = 0;
  while (next < items.size()) {
    const double hi = items[next].phi;
    while (next < items.size() && items[next].phi == hi) {
      a[items[next].cluster] += items[next].phi * items[next].inv_root;
      b[items[next].cluster] += items[next].inv_root;
      ++next;
    }
    const double lo = next < items.size() ? items[next].phi
                                          : -std::numeric_limits<double>::infinity();
    double qa = 0.0, qb = 1.0, qc = 0.0;
    for (int i = 0; i < c; ++i) {
      qa += 0.25 * b[i] * b[i];
      qb -= 0.5 * a[i] * b[i];
      qc += 0.25 * a[i] * a[i];
    }
    auto g = [&](double lam) { return (qa * lam + qb) * lam + qc; };
    const double star = std::clamp(-qb / (2.0 * qa), lo, hi);
    best = std::min({best, g(hi), std::isfinite(star) ? g(star) : best});
  }
  return best;
}

std::vector<std::vector<IndexSet>> MultiplierSweepPartitions(
    const WeightingProblem& prob, const SurrogateLayout& layout) {
  const int n = prob.size();
  const Vec inv_root = prob.varpi.cwiseSqrt().cwiseInverse();
  std::vector<double> cuts(prob.phi.data(), prob.phi.data() + n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double dw = inv_root[a] - inv_root[b];
      if (dw != 0.0) {
        cuts.push_back((prob.phi[a] * inv_root[a] - prob.phi[b] * inv_root[b]) / dw);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> probes = {cuts.front() - 1.0, cuts.back() + 1.0};
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    probes.push_back(0.5 * (cuts[j] + cuts[j + 1]));
  }

  std::vector<std::vector<IndexSet>> out;
  std::vector<int> order(n);
  for (double lam : probes) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return (prob.phi[a] - lam) * inv_root[a] > (prob.phi[b] - lam) * inv_root[b];
    });
    std::vector<IndexSet> part(layout.rows);
    int pos = 0;
    for (int i = 0; i < layout.rows; ++i) {
      for (int t = 0; t < layout.row_target[i]; ++t) part[i].push_back(order[pos++]);
      std::sort(part[i].begin(), part[i].end());
    }
    std::sort(part.begin(), part.begin() + layout.real_rows);
    if (std::find(out.begin(), out.end(), part) == out.end()) {
      out.push_back(std::move(part));
    }
  }
  return out;
}

namespace {

struct Candidate {
  Vec alpha;
  std::vector<IndexSet> clusters;
  IndexSet overflow;
  double objective = -std::numeric_limits<double>::infinity();
};

// Alternates between the best weights for a fixed partition and the
// sequential partition of those weights until neither changes.
Candidate Refine(const WeightingProblem& prob, const SurrogateLayout& layout,
                 std::vector<IndexSet> clusters, IndexSet overflow,
                 const QpOptions& qp) {
  Candidate best;
  for (int round = 0; round < 20; ++round) {
    const Vec alpha = PolishWeights(prob, layout, clusters, overflow, qp);
    IndexSet next_overflow;
    auto next = SequentialRows(prob, layout, alpha, &next_overflow);
    const double value = PartitionObjective(prob, alpha, next);
    const double floor =
        best.objective + 1e-12 * std::max(1.0, std::abs(best.objective));
    if (value <= floor && round > 0) break;
    best = {alpha, next, next_overflow, value};
    if (next == clusters && next_overflow == overflow) break;
    clusters = std::move(next);
    overflow = std::move(next_overflow);
  }
  return best;
}

// Argmax rounding of each column, then greedy single moves out of
// overfull rows; each move is the one that keeps the exact objective
// highest under the current weights.
std::vector<int> RoundAssignment(const WeightingProblem& prob,
                                 const SurrogateLayout& layout, const Mat& e,
                                 const Vec& alpha) {
  const int n = layout.devices;
  std::vector<int> row_of(n);
  std::vector<int> count(layout.rows, 0);
  for (int k = 0; k < n; ++k) {
    Eigen::Index best = 0;
    e.col(k).maxCoeff(&best);
    row_of[k] = static_cast<int>(best);
    ++count[row_of[k]];
  }
  auto score = [&](const std::vector<int>& assign) {
    std::vector<IndexSet> rows(layout.real_rows);
    for (int k = 0; k < n; ++k) {
      if (assign[k] < layout.real_rows) rows[assign[k]].push_back(k);
    }
    return PartitionObjective(prob, alpha, rows);
  };
  for (;;) {
    int over = -1;
    for (int i = 0; i < layout.rows; ++i) {
      if (count[i] > layout.row_target[i]) {
        over = i;
        break;
      }
    }
    if (over < 0) break;
    double best_value = -std::numeric_limits<double>::infinity();
    int best_k = -1;
    int best_row = -1;
    for (int k = 0; k < n; ++k) {
      if (row_of[k] != over) continue;
      for (int j = 0; j < layout.rows; ++j) {
        if (count[j] >= layout.row_target[j]) continue;
        row_of[k] = j;
        const double v = score(row_of);
        row_of[k] = over;
        if (v > best_value) {
          best_value = v;
          best_k = k;
          best_row = j;
        }
      }
    }
    row_of[best_k] = best_row;
    --count[over];
    ++count[best_row];
  }
  return row_of;
}

}  // namespace

WeightingSolution PccpOptimize(const WeightingProblem& prob,
                               const PccpSchedule& schedule) {
  const SurrogateLayout layout = MakeLayout(prob);
  const int n = layout.devices;
  WeightingSolution sol;

  const PccpIterate start = InitialIterate(prob, layout);
  PccpIterate at = start;
  Vec x = PackPoint(layout, at.alpha, at.e, at.u, at.l, Vec(), Vec());
  double tau = schedule.tau0;
  double previous = std::numeric_limits<double>::quiet_NaN();
  double slack_norm = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < schedule.max_iterations; ++iter) {
    const QpProblem qp = BuildSurrogate(prob, layout, at, tau);
    const QpResult res = SolveQp(qp, schedule.qp, &x);
    sol.iterations = iter + 1;
    const bool usable = res.x.allFinite() && qp.MaxViolation(res.x) < 1e-5;
    if (res.status != QpStatus::kOptimal) ++sol.qp_failures;
    if (!usable) {
      tau = std::min(schedule.growth * tau, schedule.tau_max);
      continue;
    }
    x = res.x;
    const double value = SurrogateValue(prob, layout, at, x, tau);
    for (int k = 0; k < n; ++k) at.alpha[k] = x[layout.alpha(k)];
    for (int i = 0; i < layout.rows; ++i) {
      for (int k = 0; k < n; ++k) at.e(i, k) = x[layout.e(i, k)];
    }
    for (int i = 0; i < layout.real_rows; ++i) {
      at.u[i] = x[layout.u(i)] * layout.noise_scale;
      at.l[i] = x[layout.l(i)] * layout.noise_scale;
    }
    slack_norm = 0.0;
    sol.slack = Vec(2 * layout.rows * n);
    for (int i = 0; i < layout.rows; ++i) {
      for (int k = 0; k < n; ++k) {
        sol.slack[i * n + k] = x[layout.p_lower(i, k)];
        sol.slack[(layout.rows + i) * n + k] = x[layout.p_upper(i, k)];
      }
    }
    slack_norm = sol.slack.cwiseAbs().sum();
    double elastic = 0.0;
    for (int i = 0; i < layout.real_rows; ++i) {
      for (int k = 0; k < n; ++k) elastic += std::abs(x[layout.elastic(i, k)]);
    }
    sol.tau_trace.push_back(tau);
    sol.slack_trace.push_back(slack_norm);
    sol.elastic_trace.push_back(elastic);
    sol.surrogate_trace.push_back(value);
    const bool settled =
        std::isfinite(previous) &&
        std::abs(value - previous) <=
            schedule.relative_tolerance * std::max(std::abs(value), 1e-12);
    previous = value;
    tau = std::min(schedule.growth * tau, schedule.tau_max);
    if (slack_norm <= schedule.chi && elastic <= schedule.chi && settled) break;
  }
  sol.relaxed_slack = slack_norm;
  sol.degraded = !(slack_norm <= schedule.chi) ||
                 (!sol.elastic_trace.empty() && !(sol.elastic_trace.back() <= schedule.chi));

  const std::vector<int> row_of = RoundAssignment(prob, layout, at.e, at.alpha);
  std::vector<IndexSet> rounded(layout.real_rows);
  IndexSet parked;
  for (int k = 0; k < n; ++k) {
    if (row_of[k] < layout.real_rows) {
      rounded[row_of[k]].push_back(k);
    } else {
      parked.push_back(k);
    }
  }
  Candidate best = Refine(prob, layout, rounded, parked, schedule.qp);

  // The starting partition is kept as a floor for the returned plan.
  std::vector<IndexSet> initial(layout.real_rows);
  IndexSet initial_parked;
  for (int k = 0; k < n; ++k) {
    Eigen::Index row = 0;
    start.e.col(k).maxCoeff(&row);
    if (row < layout.real_rows) {
      initial[row].push_back(static_cast<int>(k));
    } else {
      initial_parked.push_back(k);
    }
  }
  Candidate floor = Refine(prob, layout, initial, initial_parked, schedule.qp);
  if (floor.objective > best.objective) best = std::move(floor);
  sol.pccp_objective = best.objective;

  if (schedule.structured_candidates && (prob.varpi.array() > 0.0).all()) {
    const auto parts = MultiplierSweepPartitions(prob, layout);
    const std::vector<IndexSet>* top = nullptr;
    double top_value = -std::numeric_limits<double>::infinity();
    for (const auto& part : parts) {
      const std::vector<IndexSet> real(part.begin(), part.begin() + layout.real_rows);
      const double v = FixedPartitionOptimum(prob, real);
      if (v > top_value) {
        top_value = v;
        top = &part;
      }
    }
    if (top != nullptr && top_value > best.objective) {
      std::vector<IndexSet> real(top->begin(), top->begin() + layout.real_rows);
      IndexSet zeroed = layout.overflow ? top->back() : IndexSet();
      Candidate swept = Refine(prob, layout, std::move(real), std::move(zeroed),
                               schedule.qp);
      if (swept.objective > best.objective) best = std::move(swept);
    }
  }

  sol.alpha = best.alpha;
  sol.clusters = best.clusters;
  sol.overflow = best.overflow;
  sol.objective = best.objective;
  sol.assignment = Mat::Zero(layout.rows, n);
  sol.u = Vec::Zero(layout.real_rows);
  sol.l = Vec::Zero(layout.real_rows);
  for (int i = 0; i < layout.real_rows; ++i) {
    double hi = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (int k : sol.clusters[i]) {
      sol.assignment(i, k) = 1.0;
      const double v = std::sqrt(prob.varpi[k]) * sol.alpha[k];
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    sol.u[i] = hi;
    sol.l[i] = (layout.padded && i == layout.real_rows - 1) ? 0.0 : lo;
  }
  for (int k : sol.overflow) sol.assignment(layout.real_rows, k) = 1.0;
  return sol;
}

}  // namespace airfl
