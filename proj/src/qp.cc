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

#include "airfl/qp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace airfl {

QpProblem::QpProblem(int n)
    : num_vars(n),
      objective_linear(Vec::Zero(n)),
      lower(Vec::Constant(n, -std::numeric_limits<double>::infinity())),
      upper(Vec::Constant(n, std::numeric_limits<double>::infinity())),
      names(n) {}

int QpProblem::AddVariable(const std::string& name, double lo, double hi) {
  const int id = num_vars++;
  objective_linear.conservativeResize(num_vars);
  objective_linear[id] = 0.0;
  lower.conservativeResize(num_vars);
  upper.conservativeResize(num_vars);
  lower[id] = lo;
  upper[id] = hi;
  names.push_back(name);
  return id;
}

namespace {

double QuadForm(const std::vector<QuadTerm>& quad, const Vec& x) {
  double v = 0.0;
  for (const auto& t : quad) {
    const double w = t.row == t.col ? 0.5 : 1.0;
    v += w * t.value * x[t.row] * x[t.col];
  }
  return v;
}

double Dot(const SparseRow& row, const Vec& x) {
  double v = 0.0;
  for (const auto& [j, a] : row) v += a * x[j];
  return v;
}

}  // namespace

double QpProblem::Objective(const Vec& x) const {
  return QuadForm(objective_quad, x) + objective_linear.dot(x);
}

double QpProblem::ConstraintValue(int j, const Vec& x) const {
  const auto& c = inequalities[j];
  return QuadForm(c.quad, x) + Dot(c.linear, x) - c.rhs;
}

double QpProblem::MaxViolation(const Vec& x) const {
  double worst = 0.0;
  for (const auto& e : equalities) {
    worst = std::max(worst, std::abs(Dot(e.linear, x) - e.rhs));
  }
  for (int j = 0; j < static_cast<int>(inequalities.size()); ++j) {
    worst = std::max(worst, ConstraintValue(j, x));
  }
  for (int i = 0; i < num_vars; ++i) {
    worst = std::max({worst, lower[i] - x[i], x[i] - upper[i]});
  }
  return worst;
}

std::string QpProblem::Dump() const {
  std::ostringstream out;
  out.precision(17);
  auto name = [&](int i) {
    return names[i].empty() ? "x" + std::to_string(i) : names[i];
  };
  out << "minimize\n";
  for (const auto& t : objective_quad) {
    out << "  quad " << name(t.row) << ' ' << name(t.col) << ' ' << t.value
        << '\n';
  }
  for (int i = 0; i < num_vars; ++i) {
    if (objective_linear[i] != 0.0) {
      out << "  lin " << name(i) << ' ' << objective_linear[i] << '\n';
    }
  }
  for (const auto& e : equalities) {
    out << "equality " << e.label << " rhs " << e.rhs << '\n';
    for (const auto& [j, a] : e.linear) out << "  lin " << name(j) << ' ' << a << '\n';
  }
  for (const auto& c : inequalities) {
    out << "inequality " << c.label << " rhs " << c.rhs << '\n';
    for (const auto& t : c.quad) {
      out << "  quad " << name(t.row) << ' ' << name(t.col) << ' ' << t.value
          << '\n';
    }
    for (const auto& [j, a] : c.linear) out << "  lin " << name(j) << ' ' << a << '\n';
  }
  out << "bounds\n";
  for (int i = 0; i < num_vars; ++i) {
    out << "  " << name(i) << ' ' << lower[i] << ' ' << upper[i] << '\n';
  }
  return out.str();
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Inequality restricted to the variables it touches.
struct Compiled {
  std::vector<int> support;
  Mat q;
  Vec a;
  double rhs = 0.0;
  std::string label;
  int bound_var = -1;  // variable of a simple bound row
  double bound_sign = 0.0;

  Vec Gather(const Vec& x) const {
    Vec xs(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) xs[i] = x[support[i]];
    return xs;
  }
  double Value(const Vec& x) const {
    const Vec xs = Gather(x);
    return 0.5 * xs.dot(q * xs) + a.dot(xs) - rhs;
  }
  Vec LocalGradient(const Vec& x) const { return q * Gather(x) + a; }
};

Compiled Compile(const QuadConstraint& c) {
  std::map<int, int> local;
  for (const auto& t : c.quad) {
    local.emplace(t.row, 0);
    local.emplace(t.col, 0);
  }
  for (const auto& [j, v] : c.linear) local.emplace(j, 0);
  Compiled out;
  for (auto& [j, slot] : local) {
    slot = static_cast<int>(out.support.size());
    out.support.push_back(j);
  }
  const int m = static_cast<int>(out.support.size());
  out.q = Mat::Zero(m, m);
  out.a = Vec::Zero(m);
  for (const auto& t : c.quad) {
    const int r = local[t.row];
    const int s = local[t.col];
    out.q(r, s) += t.value;
    if (r != s) out.q(s, r) += t.value;
  }
  for (const auto& [j, v] : c.linear) out.a[local[j]] += v;
  out.rhs = c.rhs;
  out.label = c.label;
  return out;
}

Compiled BoundRow(int var, double sign, double rhs, const std::string& label) {
  Compiled out;
  out.support = {var};
  out.q = Mat::Zero(1, 1);
  out.a = Vec::Constant(1, sign);
  out.rhs = rhs;
  out.label = label;
  out.bound_var = var;
  out.bound_sign = sign;
  return out;
}

double MaxStep(const Vec& v, const Vec& dv) {
  double step = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) step = std::min(step, -v[i] / dv[i]);
  }
  return step;
}

}  // namespace

QpResult SolveQp(const QpProblem& prob, const QpOptions& opt, const Vec* start) {
  const int n = prob.num_vars;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Inequalities, including finite bounds; fixed variables become equalities.
  std::vector<Compiled> cons;
  for (const auto& c : prob.inequalities) cons.push_back(Compile(c));
  std::vector<LinearEquality> eqs = prob.equalities;
  for (int i = 0; i < n; ++i) {
    const double lo = prob.lower[i];
    const double hi = prob.upper[i];
    if (lo > hi) {
      QpResult bad;
      bad.status = QpStatus::kInfeasible;
      bad.x = Vec::Zero(n);
      bad.violated.push_back("bounds of " + prob.names[i]);
      return bad;
    }
    if (lo == hi) {
      eqs.push_back({{{i, 1.0}}, lo, "fixed " + prob.names[i]});
      continue;
    }
    if (lo > -kInf) cons.push_back(BoundRow(i, -1.0, -lo, "lower " + prob.names[i]));
    if (hi < kInf) cons.push_back(BoundRow(i, 1.0, hi, "upper " + prob.names[i]));
  }
  const int m = static_cast<int>(cons.size());
  const int p = static_cast<int>(eqs.size());

  SpMat objective_p(n, n);
  {
    std::vector<Triplet> trips;
    for (const auto& t : prob.objective_quad) {
      trips.emplace_back(t.row, t.col, t.value);
      if (t.row != t.col) trips.emplace_back(t.col, t.row, t.value);
    }
    objective_p.setFromTriplets(trips.begin(), trips.end());
  }
  const Vec& c = prob.objective_linear;
  SpMat a_eq(p, n);
  Vec b_eq(p);
  {
    std::vector<Triplet> trips;
    for (int r = 0; r < p; ++r) {
      for (const auto& [j, v] : eqs[r].linear) trips.emplace_back(r, j, v);
      b_eq[r] = eqs[r].rhs;
    }
    a_eq.setFromTriplets(trips.begin(), trips.end());
  }

  Vec x = start != nullptr ? *start : Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (prob.lower[i] > -kInf && prob.upper[i] < kInf) {
      x[i] = std::clamp(x[i], prob.lower[i], prob.upper[i]);
    }
  }
  Vec y = Vec::Zero(p);
  Vec s(m);
  Vec z = Vec::Ones(m);
  for (int j = 0; j < m; ++j) s[j] = std::max(-cons[j].Value(x), 1.0);
  // A bound row pressed by a large linear cost starts with a matching dual,
  // which keeps the first Newton steps on the scale of the variables.
  for (int j = 0; j < m; ++j) {
    if (cons[j].bound_var >= 0) {
      z[j] = std::max(1.0, -cons[j].bound_sign * c[cons[j].bound_var]);
    }
  }

  const double c_scale = 1.0 + c.lpNorm<Eigen::Infinity>();
  const double b_scale = 1.0 + (p > 0 ? b_eq.lpNorm<Eigen::Infinity>() : 0.0);
  constexpr double kRegPrimal = 1e-9;
  constexpr double kRegDual = 1e-9;

  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  bool analysed = false;
  SpMat kkt(n + p, n + p);

  QpResult res;
  std::vector<Vec> grads(m);
  Vec g(m);
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    res.iterations = iter;
    for (int j = 0; j < m; ++j) {
      g[j] = cons[j].Value(x);
      grads[j] = cons[j].LocalGradient(x);
    }
    Vec r_d = objective_p * x + c;
    if (p > 0) r_d += a_eq.transpose() * y;
    for (int j = 0; j < m; ++j) {
      for (std::size_t t = 0; t < cons[j].support.size(); ++t) {
        r_d[cons[j].support[t]] += z[j] * grads[j][t];
      }
    }
    const Vec r_p = p > 0 ? Vec(a_eq * x - b_eq) : Vec();
    const Vec r_g = g + s;
    const double mu = m > 0 ? s.dot(z) / m : 0.0;

    const double res_d = r_d.lpNorm<Eigen::Infinity>() / c_scale;
    const double res_p = p > 0 ? r_p.lpNorm<Eigen::Infinity>() / b_scale : 0.0;
    const double res_g = m > 0 ? r_g.lpNorm<Eigen::Infinity>() : 0.0;
    res.kkt_residual = std::max({res_d, res_p, res_g, mu});
    if (res.kkt_residual <= opt.tolerance) {
      res.status = QpStatus::kOptimal;
      break;
    }
    if (m > 0 && z.lpNorm<Eigen::Infinity>() > 1e12) {
      res.status = QpStatus::kInfeasible;
      break;
    }

    // Assemble [H + J'DJ + dI, A'; A, -dI] with a fixed sparsity pattern.
    std::vector<Triplet> trips;
    for (int k = 0; k < objective_p.outerSize(); ++k) {
      for (SpMat::InnerIterator it(objective_p, k); it; ++it) {
        trips.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (int j = 0; j < m; ++j) {
      const auto& sup = cons[j].support;
      const double d = z[j] / s[j];
      for (std::size_t r = 0; r < sup.size(); ++r) {
        for (std::size_t q = 0; q < sup.size(); ++q) {
          trips.emplace_back(sup[r], sup[q],
                             z[j] * cons[j].q(r, q) + d * grads[j][r] * grads[j][q]);
        }
      }
    }
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, kRegPrimal);
    for (int r = 0; r < p; ++r) {
      for (const auto& [j, v] : eqs[r].linear) {
        trips.emplace_back(n + r, j, v);
        trips.emplace_back(j, n + r, v);
      }
      trips.emplace_back(n + r, n + r, -kRegDual);
    }
    kkt.setFromTriplets(trips.begin(), trips.end());
    if (!analysed) {
      ldlt.analyzePattern(kkt);
      analysed = true;
    }
    ldlt.factorize(kkt);
    if (ldlt.info() != Eigen::Success) {
      res.status = QpStatus::kInfeasible;
      break;
    }

    auto solve = [&](const Vec& r_c, Vec& dx, Vec& dy, Vec& ds, Vec& dz) {
      Vec rhs(n + p);
      rhs.head(n) = -r_d;
      for (int j = 0; j < m; ++j) {
        const double w = (z[j] * r_g[j] - r_c[j]) / s[j];
        for (std::size_t t = 0; t < cons[j].support.size(); ++t) {
          rhs[cons[j].support[t]] -= w * grads[j][t];
        }
      }
      if (p > 0) rhs.tail(p) = -r_p;
      Vec sol = ldlt.solve(rhs);
      // Two refinement passes against the unregularised matrix.
      for (int pass = 0; pass < 2; ++pass) {
        Vec resid = rhs - kkt * sol;
        resid.head(n) += kRegPrimal * sol.head(n);
        if (p > 0) resid.tail(p) -= kRegDual * sol.tail(p);
        sol += ldlt.solve(resid);
      }
      dx = sol.head(n);
      dy = p > 0 ? Vec(sol.tail(p)) : Vec();
      ds.resize(m);
      dz.resize(m);
      for (int j = 0; j < m; ++j) {
        double jdx = 0.0;
        for (std::size_t t = 0; t < cons[j].support.size(); ++t) {
          jdx += grads[j][t] * dx[cons[j].support[t]];
        }
        ds[j] = -r_g[j] - jdx;
        dz[j] = (-r_c[j] + z[j] * r_g[j] + z[j] * jdx) / s[j];
      }
    };

    Vec dx, dy, ds, dz;
    Vec r_c = s.cwiseProduct(z);
    solve(r_c, dx, dy, ds, dz);
    if (m > 0) {
      const double a_aff = std::min(MaxStep(s, ds), MaxStep(z, dz));
      const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / m;
      const double sigma = std::min(1.0, std::pow(mu_aff / mu, 3.0));
      r_c += ds.cwiseProduct(dz);
      r_c.array() -= sigma * mu;
      solve(r_c, dx, dy, ds, dz);
    }
    const double step =
        m > 0 ? std::min(1.0, 0.99 * std::min(MaxStep(s, ds), MaxStep(z, dz)))
              : 1.0;
    x += step * dx;
    if (p > 0) y += step * dy;
    if (m > 0) {
      s += step * ds;
      z += step * dz;
    }
    res.iterations = iter + 1;
  }

  res.x = x;
  res.eq_duals = y;
  res.ineq_duals = z.head(std::min<Eigen::Index>(z.size(), prob.inequalities.size()));
  res.objective = prob.Objective(x);
  if (res.status != QpStatus::kOptimal) {
    const double tol = std::max(opt.tolerance, 1e-6);
    for (const auto& e : eqs) {
      if (std::abs(Dot(e.linear, x) - e.rhs) > tol) res.violated.push_back(e.label);
    }
    for (const auto& con : cons) {
      if (con.Value(x) > tol) res.violated.push_back(con.label);
    }
  }
  return res;
}

}  // namespace airfl
