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


#include "checks.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "airfl/aircomp.h"
#include "airfl/channel.h"
#include "airfl/clustering.h"
#include "airfl/config.h"
#include "airfl/diagnostics.h"
#include "airfl/harness.h"
#include "airfl/weighting.h"
#include "airfl/zta.h"
#include "oracles.h"
#include "weighting_instances.h"

namespace airfl::checks {
namespace {

using Clock = std::chrono::steady_clock;

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

void Progress(const SuiteOptions& o, const std::string& line) {
  if (o.verbose) std::cerr << "  " << line << std::endl;
}

ExperimentConfig SuiteConfig(const SuiteOptions& o, const std::string& file) {
  ExperimentConfig c = LoadConfig(o.config_dir + "/" + file);
  c.data_dir = o.data_dir;
  return c;
}

// Minimum summed cluster noise over all equal-block partitions, by dynamic
// programming over subsets. Cost of a block: the largest (alpha/gain)^2 over
// its activated positive-weight members.
double SubsetDpMinimum(const Vec& alpha, const RoundChannel& ch,
                       const PowerConfig& pc, int block) {
  const int n = static_cast<int>(alpha.size());
  const unsigned full = (1u << n) - 1;
  std::vector<double> cost(1u << n, 0.0);
  for (unsigned s = 1; s <= full; ++s) {
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
      if (!(s >> k & 1u) || alpha[k] <= 0.0) continue;
      const double mag = std::abs(ch.h[k]);
      if (mag < ch.threshold) continue;
      const double r = alpha[k] / (mag * ch.beta[k]);
      worst = std::max(worst, r * r);
    }
    cost[s] = worst;
  }
  std::vector<double> best(1u << n, std::numeric_limits<double>::infinity());
  best[0] = 0.0;
  for (unsigned used = 0; used < full; ++used) {
    if (!std::isfinite(best[used])) continue;
    const unsigned rest = full & ~used;
    const unsigned lead = rest & (~rest + 1u);
    // Every block of size `block` inside `rest` containing the lowest free
    // device.
    for (unsigned s = rest; s != 0; s = (s - 1) & rest) {
      if (!(s & lead) || std::popcount(s) != block) continue;
      best[used | s] = std::min(best[used | s], best[used] + cost[s]);
    }
  }
  return best[full] * pc.noise_power * pc.clip_norm * pc.clip_norm /
         (2.0 * pc.p_max);
}

CheckResult Theorem1Suite(const SuiteOptions& o) {
  CheckResult r{.id = 1, .name = "theorem1", .budget_seconds = 60.0};
  const std::vector<std::pair<int, int>> shapes = {{4, 2}, {4, 4}, {6, 2},
                                                   {6, 3}, {8, 2}, {8, 4}};
  std::mt19937_64 rng(20261);
  PowerConfig pc{.p_max = 1e-3, .clip_norm = 10.0, .noise_power = 1e-6};
  std::uniform_real_distribution<double> u(0.05, 1.0);
  int matches = 0;
  int ties = 0;
  double worst_gap = 0.0;
  const int instances = 200;
  for (int t = 0; t < instances; ++t) {
    const auto [n, block] = shapes[t % shapes.size()];
    const Vec beta = LargeScaleFading(SampleDistances(rng, n, 150.0, 500.0));
    RoundChannel ch = SampleRoundChannel(rng, beta, 0.2);
    Vec alpha = Vec::NullaryExpr(n, [&] { return u(rng); });
    if (t % 5 == 1) alpha[t % n] = 0.0;
    if (t % 7 == 2) {
      // Equal equivalent channels for two devices.
      alpha.setConstant(1.0);
      ch.h[1] = ch.h[0];
      ch.beta[1] = ch.beta[0];
      ch.activated.clear();
      for (int k = 0; k < n; ++k) {
        if (ch.is_activated(k)) ch.activated.push_back(k);
      }
      ++ties;
    }
    alpha /= alpha.sum();
    const auto seq = SequentialCluster(EquivalentChannel(ch, alpha), block);
    double seq_noise = 0.0;
    for (const auto& c : seq) seq_noise += ClusterNoisePower(c, alpha, ch, pc);
    const double oracle = SubsetDpMinimum(alpha, ch, pc, block);
    const double gap = std::abs(seq_noise - oracle) / std::max(oracle, 1e-300);
    worst_gap = std::max(worst_gap, gap);
    if (gap <= 1e-12 || seq_noise == oracle) ++matches;
  }
  r.pass = matches == instances;
  r.detail = Format("%d/%d instances match the exhaustive minimum (%d with tied "
                    "keys), worst relative gap %.2e",
                    matches, instances, ties, worst_gap);
  return r;
}

CheckResult NoiseSuite(const SuiteOptions& o) {
  CheckResult r{.id = 2, .name = "noise", .budget_seconds = 30.0};
  struct Setup {
    int devices;
    int block;
    PowerConfig pc;
  };
  const std::vector<Setup> setups = {
      {8, 4, {.p_max = 1e-3, .clip_norm = 10.0, .noise_power = 1e-6}},
      {6, 2, {.p_max = 1e-2, .clip_norm = 1.0, .noise_power = 1e-4}},
      {4, 4, {.p_max = 0.1, .clip_norm = 5.0, .noise_power = 1.0}},
  };
  const int dim = 1000;
  const int repeats = 100;  // 1e5 draws per cluster
  double worst = 0.0;
  int clusters_checked = 0;
  bool ok = true;
  std::mt19937_64 rng(20262);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (const Setup& s : setups) {
    const Vec beta = LargeScaleFading(SampleDistances(rng, s.devices, 150.0, 500.0));
    RoundChannel ch;
    do {
      ch = SampleRoundChannel(rng, beta, 0.2);
    } while (static_cast<int>(ch.activated.size()) < s.devices);
    ClusterPlan plan;
    plan.alpha = Vec::NullaryExpr(s.devices, [&] { return u(rng); });
    plan.alpha /= plan.alpha.sum();
    plan.clusters = SequentialCluster(EquivalentChannel(ch, plan.alpha), s.block);
    const std::vector<Vec> zeros(s.devices, Vec::Zero(dim));
    std::vector<double> sum_sq(plan.num_clusters(), 0.0);
    for (int rep = 0; rep < repeats; ++rep) {
      const auto agg = ClusterAggregate(plan, zeros, ch, s.pc, rng);
      for (int n = 0; n < plan.num_clusters(); ++n) {
        sum_sq[n] += agg.updates[n].g.squaredNorm();
      }
    }
    for (int n = 0; n < plan.num_clusters(); ++n) {
      double ratio = std::numeric_limits<double>::infinity();
      for (int k : plan.clusters[n]) ratio = std::min(ratio, ch.gain(k) / plan.alpha[k]);
      const double zeta = std::sqrt(s.pc.p_max) / s.pc.clip_norm * ratio;
      const double expected = s.pc.noise_power / (2.0 * zeta * zeta);
      const double measured = sum_sq[n] / (static_cast<double>(dim) * repeats);
      const double rel = std::abs(measured / expected - 1.0);
      worst = std::max(worst, rel);
      ok = ok && rel <= 0.02;
      ++clusters_checked;
    }
  }
  r.pass = ok;
  r.detail = Format("%d clusters over 3 configurations, 1e5 draws each, worst "
                    "relative variance error %.3f%%",
                    clusters_checked, 100.0 * worst);
  (void)o;
  return r;
}

CheckResult PowerSuite(const SuiteOptions& o) {
  CheckResult r{.id = 3, .name = "power"};
  const ExperimentConfig c = SuiteConfig(o, "defaults.json");
  Experiment exp(c);
  long transmissions = 0;
  long violations = 0;
  double peak = 0.0;
  const double p_max = exp.power().p_max;
  for (int m = 0; m < c.effective_rounds(); ++m) {
    const PreparedRound p = exp.Prepare();
    std::mt19937_64 rng = Stream(c.seed, StreamTag::kClusterNoise, m);
    const AggregatedRound agg = exp.Aggregate(p, rng);
    for (int k = 0; k < c.devices; ++k) {
      if (exp.roster().is_byzantine(k) || !agg.aggregation.transmitted[k]) continue;
      ++transmissions;
      const double power = agg.aggregation.transmit_power[k];
      peak = std::max(peak, power / p_max);
      violations += power > p_max;
    }
    exp.Commit(p, agg);
    if (m % 50 == 49) Progress(o, Format("round %d, violations so far %ld", m + 1, violations));
  }
  r.pass = violations == 0 && transmissions > 0;
  r.detail = Format("K=%d, %d rounds: %ld honest transmissions, %ld above P_max, "
                    "peak |rho g|^2 / P_max = %.15f",
                    c.devices, c.effective_rounds(), transmissions, violations, peak);
  return r;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe Moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

CheckResult TheorySuite(const SuiteOptions& o) {
  CheckResult r{.id = 4, .name = "theory", .budget_seconds = 300.0};
  const ExperimentConfig c = SuiteConfig(o, "theory.json");
  const int horizon = c.effective_rounds();
  const int draws = 100;

  // One-round bound along a reference trajectory: branch `draws` receiver
  // noise realisations from each prepared round.
  Experiment ref(c);
  const double f_star = ref.task().f_star.value();
  std::vector<double> contraction;
  std::vector<double> offset;
  int lemma_ok = 0;
  long at_clip = 0;
  long sent = 0;
  for (int m = 0; m < horizon; ++m) {
    const PreparedRound p = ref.Prepare();
    for (const Vec& g : p.sent) {
      ++sent;
      at_clip += std::abs(g.norm() - c.clip_norm) <= 1e-12 * c.clip_norm;
    }
    const double before = GlobalLoss(ref.model(), ref.task().partitions);
    std::vector<double> drop;
    for (int j = 0; j < draws; ++j) {
      std::mt19937_64 rng = Stream(1000003 + j, StreamTag::kClusterNoise, m);
      const AggregatedRound agg = ref.Aggregate(p, rng);
      const Model next{ref.task().arch, agg.next_w};
      drop.push_back(GlobalLoss(next, ref.task().partitions) - before);
    }
    std::mt19937_64 rng = Stream(c.seed, StreamTag::kClusterNoise, m);
    const RoundMetrics rm = ref.Commit(p, ref.Aggregate(p, rng));
    const MeanSe d = Moments(drop);
    lemma_ok += d.mean <= rm.lemma1_bound + 3.0 * d.se;
    contraction.push_back(rm.contraction);
    offset.push_back(rm.offset);
  }

  // Finite-horizon bound: independent noise seeds, identical everything else.
  std::vector<std::vector<double>> gaps(horizon);
  double initial_gap = 0.0;
  for (int j = 0; j < draws; ++j) {
    Experiment e(c);
    e.set_noise_seed(2000003 + j);
    initial_gap = GlobalLoss(e.model(), e.task().partitions) - f_star;
    for (int m = 0; m < horizon; ++m) {
      const RoundMetrics rm = e.Step();
      gaps[m].push_back(rm.global_loss - f_star);
    }
    if (j % 25 == 24) Progress(o, Format("trajectories %d/%d", j + 1, draws));
  }
  const std::vector<double> bound = Theorem3GapTrace(contraction, offset, initial_gap);
  int theorem_ok = 0;
  double tightest = std::numeric_limits<double>::infinity();
  for (int m = 0; m < horizon; ++m) {
    const MeanSe g = Moments(gaps[m]);
    theorem_ok += g.mean <= bound[m] + 3.0 * g.se;
    tightest = std::min(tightest, bound[m] / std::max(g.mean, 1e-300));
  }
  r.pass = lemma_ok == horizon && theorem_ok == horizon;
  r.detail = Format("one-round bound holds in %d/%d rounds; gap bound holds for "
                    "%d/%d horizons (smallest bound/empirical ratio %.3g); d=%d, "
                    "K=%d, %d noise seeds, %ld/%ld gradients at norm G",
                    lemma_ok, horizon, theorem_ok, horizon, tightest,
                    c.quadratic_dim, c.devices, draws, at_clip, sent);
  return r;
}

CheckResult IdentificationSuite(const SuiteOptions& o) {
  CheckResult r{.id = 5, .name = "identification", .budget_seconds = 300.0};
  ExperimentConfig c = SuiteConfig(o, "identification.json");
  const int runs = 50;
  int hits = 0;
  std::string misses;
  for (int s = 1; s <= runs; ++s) {
    c.seed = s;
    Experiment e(c);
    for (int m = 0; m < c.effective_rounds(); ++m) e.Step();
    const IndexSet found = IdentifyByzantine(e.ledger(), c.suspects());
    if (found == e.roster().byzantine) {
      ++hits;
    } else {
      misses += (misses.empty() ? "" : ",") + std::to_string(s);
    }
    if (s % 10 == 0) Progress(o, Format("seed %d: %d hits", s, hits));
  }
  r.pass = hits * 100 >= 95 * runs;
  r.detail = Format("exact Byzantine set after %d rounds in %d/%d runs (K=%d, "
                    "M=%d, N=%d)%s%s",
                    c.effective_rounds(), hits, runs, c.devices, c.byzantine,
                    c.clusters, misses.empty() ? "" : "; missed seeds ",
                    misses.c_str());
  return r;
}

CheckResult PccpSuite(const SuiteOptions& o) {
  CheckResult r{.id = 6, .name = "pccp", .budget_seconds = 600.0};
  std::mt19937_64 rng(20266);
  const int instances = 50;
  int ok = 0;
  int plain_hits = 0;
  double worst_gap = 0.0;
  double worst_slack = 0.0;
  for (int t = 0; t < instances; ++t) {
    const WeightingProblem prob = testing_util::RandomWeightingProblem(rng, 6, 2, 3);
    const WeightingSolution sol = PccpOptimize(prob);
    const auto best = oracle::ExhaustiveWeighting(prob.phi, prob.varpi, {3, 3}, 2);
    bool assignment = sol.assignment.rows() == 2 && sol.assignment.cols() == 6;
    for (int k = 0; assignment && k < 6; ++k) {
      assignment = sol.assignment.col(k).sum() == 1.0;
    }
    for (int i = 0; assignment && i < 2; ++i) {
      assignment = sol.assignment.row(i).sum() == 3.0;
    }
    assignment = assignment &&
                 ((sol.assignment.array() == 0.0) || (sol.assignment.array() == 1.0)).all();
    const double gap = best.value - sol.objective;
    worst_gap = std::max(worst_gap, gap);
    worst_slack = std::max(worst_slack, sol.relaxed_slack);
    ok += assignment && sol.relaxed_slack <= 1e-4 && gap <= 1e-3;
    plain_hits += best.value - sol.pccp_objective <= 1e-3;
    if (t % 10 == 9) Progress(o, Format("instance %d: %d ok", t + 1, ok));
  }
  r.pass = ok == instances;
  r.detail = Format("%d/%d instances terminate with |p|_1 <= 1e-4, exact C8/C9 and "
                    "objective within 1e-3 of the exhaustive optimum (worst gap "
                    "%.2e, worst slack %.2e); plain relaxation alone reaches the "
                    "optimum in %d/%d",
                    ok, instances, worst_gap, worst_slack, plain_hits, instances);
  return r;
}

CheckResult FairnessSuite(const SuiteOptions& o) {
  CheckResult r{.id = 7, .name = "fairness"};
  const ExperimentConfig c = SuiteConfig(o, "fairness.json");
  Experiment e(c);
  const int rounds = c.effective_rounds();
  std::vector<double> queue_max;
  for (int m = 0; m < rounds; ++m) {
    queue_max.push_back(e.Step().queue_max);
    if (m % 100 == 99) Progress(o, Format("round %d, queue max %.4f", m + 1, queue_max.back()));
  }
  const double b = c.fairness();
  const Vec mean = e.MeanWeightedContribution();
  double lowest = std::numeric_limits<double>::infinity();
  for (int k = 0; k < c.devices; ++k) {
    if (!e.roster().is_byzantine(k)) lowest = std::min(lowest, mean[k]);
  }
  // Least-squares slope of the honest queue maximum over the last 200 rounds.
  const int window = std::min(200, rounds);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < window; ++i) {
    const double x = i;
    const double y = queue_max[rounds - window + i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (window * sxy - sx * sy) / (window * sxx - sx * sx);
  const double peak = *std::max_element(queue_max.begin(), queue_max.end());
  const bool reached = lowest >= 0.9 * b;
  const bool bounded = slope < 0.1 * b;
  r.pass = reached && bounded;
  r.detail = Format("b=%.4f: lowest honest mean alpha*gamma_bar %.4f (need >= "
                    "%.4f); honest queue max slope over last %d rounds %.2e per "
                    "round (limit %.2e), peak %.3f",
                    b, lowest, 0.9 * b, window, slope, 0.1 * b, peak);
  return r;
}

CheckResult MnistSuite(const SuiteOptions& o) {
  CheckResult r{.id = 8, .name = "mnist", .budget_seconds = 1800.0};
  ExperimentConfig c = SuiteConfig(o, "mnist_desk.json");
  const int seeds = 10;
  int good = 0;
  std::string table;
  int params = 0;
  for (int s = 1; s <= seeds; ++s) {
    c.seed = s;
    double acc[3];
    const Scheme schemes[3] = {Scheme::kFedsac, Scheme::kRandomClustering,
                               Scheme::kNonRobust};
    for (int i = 0; i < 3; ++i) {
      c.scheme = schemes[i];
      if (params == 0) params = BuildTask(c).arch->dimension();
      const auto summary = RunExperiment(c);
      const auto& v = summary.json["final"]["test_accuracy"];
      acc[i] = v.is_number() ? v.get<double>() : 0.0;
    }
    const bool win = acc[0] - acc[1] >= 0.02 && acc[0] - acc[2] >= 0.10;
    good += win;
    table += Format("%s%d:%.3f/%.3f/%.3f", table.empty() ? "" : " ", s, acc[0],
                    acc[1], acc[2]);
    Progress(o, Format("seed %d fedsac %.3f random %.3f non_robust %.3f", s, acc[0],
                       acc[1], acc[2]));
  }
  r.pass = good * 10 >= 8 * seeds && params == 23860;
  r.detail = Format("%d/%d seeds with fedsac >= random_clustering + 2 points and >= "
                    "non_robust + 10 points (MLP with %d parameters); seed:fedsac/"
                    "random/non_robust %s",
                    good, seeds, params, table.c_str());
  return r;
}

CheckResult TradeoffSuite(const SuiteOptions& o) {
  CheckResult r{.id = 9, .name = "tradeoff"};
  ExperimentConfig c = SuiteConfig(o, "tradeoff.json");
  const std::vector<int> counts = {1, 2, 4, 5};
  const std::vector<std::uint64_t> seeds = {1, 2, 3};
  const Scheme schemes[2] = {Scheme::kFedsac, Scheme::kRandomClustering};
  int best_n[2] = {0, 0};
  std::string table;
  for (int i = 0; i < 2; ++i) {
    double best = std::numeric_limits<double>::infinity();
    c.scheme = schemes[i];
    table += (i == 0 ? "fedsac" : "; random_clustering");
    for (int n : counts) {
      c.clusters = n;
      double total = 0.0;
      for (auto s : seeds) {
        c.seed = s;
        const auto summary = RunExperiment(c);
        const auto& v = summary.json["best_test_loss"];
        total += v.is_number() ? v.get<double>() : std::numeric_limits<double>::infinity();
      }
      const double mean = total / seeds.size();
      table += Format(" N=%d:%.3f", n, mean);
      if (mean < best) {
        best = mean;
        best_n[i] = n;
      }
      Progress(o, Format("%s N=%d mean best test loss %.4f", SchemeName(c.scheme).c_str(),
                         n, mean));
    }
  }
  r.pass = best_n[0] <= best_n[1];
  r.detail = Format("budget %d cluster transmissions, mean best test loss over %zu "
                    "seeds (%s): best N fedsac %d, random_clustering %d",
                    c.resource_budget, seeds.size(), table.c_str(), best_n[0],
                    best_n[1]);
  return r;
}

using SuiteFn = CheckResult (*)(const SuiteOptions&);

const std::vector<SuiteFn>& Suites() {
  static const std::vector<SuiteFn> fns = {
      Theorem1Suite, NoiseSuite,  PowerSuite,    TheorySuite,  IdentificationSuite,
      PccpSuite,     FairnessSuite, MnistSuite, TradeoffSuite};
  return fns;
}

}  // namespace

const std::vector<std::string>& SuiteNames() {
  static const std::vector<std::string> names = {
      "theorem1", "noise",    "power", "theory",  "identification",
      "pccp",     "fairness", "mnist", "tradeoff"};
  return names;
}

CheckResult RunSuite(const std::string& name, const SuiteOptions& options) {
  const auto& names = SuiteNames();
  int index = -1;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (name == names[i] || name == std::to_string(i + 1)) index = static_cast<int>(i);
  }
  if (index < 0) throw std::invalid_argument("unknown suite: " + name);
  const auto start = Clock::now();
  CheckResult result;
  try {
    result = Suites()[index](options);
  } catch (const std::exception& e) {
    result.id = index + 1;
    result.name = names[index];
    result.pass = false;
    result.detail = std::string("error: ") + e.what();
  }
  result.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (result.budget_seconds > 0.0 && result.seconds > result.budget_seconds) {
    result.pass = false;
    result.detail += Format("; over the %.0f s runtime limit", result.budget_seconds);
  }
  return result;
}

std::string FormatResult(const CheckResult& r) {
  std::ostringstream out;
  out << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << " [" << r.name << "] ("
      << Format("%.1f s", r.seconds);
  if (r.budget_seconds > 0.0) out << Format(" of %.0f s", r.budget_seconds);
  out << "): " << r.detail;
  return out.str();
}

}  // namespace airfl::checks
