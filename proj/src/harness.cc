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

#include "airfl/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "airfl/clustering.h"
#include "airfl/diagnostics.h"
#include "airfl/quadratic.h"

namespace airfl {
namespace {

using nlohmann::json;

std::vector<int> AllRows(int n) {
  std::vector<int> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

TaskBundle ClassificationBundle(const ExperimentConfig& c, const Dataset& train,
                                Dataset test) {
  TaskBundle out;
  const int per_label = std::max(
      1, static_cast<int>(std::lround(c.root_fraction * train.size() / train.arity)));
  auto [root, rest] = SplitRootDataset(train, per_label, c.seed);
  out.root = std::move(root);
  out.partitions = PartitionNonIid(rest, c.devices, c.labels_per_device, c.seed);
  out.test = std::move(test);
  if (c.model == "mlp") {
    out.arch = std::make_shared<Mlp>(train.feature_dim(), c.hidden_units, train.arity);
  } else {
    out.arch = std::make_shared<LinearSoftmax>(train.feature_dim(), train.arity);
  }
  out.smoothness = c.smoothness;
  out.pl_constant = c.pl_constant;
  return out;
}

std::string Format(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

double Ratio(int num, int den) {
  return den == 0 ? RoundMetrics::kNaN : static_cast<double>(num) / den;
}

}  // namespace

TaskBundle BuildTask(const ExperimentConfig& c) {
  switch (c.task) {
    case TaskKind::kMnist: {
      const std::string dir = c.data_dir + "/";
      Dataset train = LoadIdx(dir + "train-images-idx3-ubyte",
                              dir + "train-labels-idx1-ubyte", c.train_samples);
      Dataset test = LoadIdx(dir + "t10k-images-idx3-ubyte",
                             dir + "t10k-labels-idx1-ubyte", c.test_samples);
      return ClassificationBundle(c, train, std::move(test));
    }
    case TaskKind::kGaussian: {
      const int test_rows = std::max(c.test_samples, c.gaussian_classes);
      const Dataset all = MakeGaussianClassification(
          c.gaussian_samples + test_rows, c.gaussian_features,
          c.gaussian_classes, c.gaussian_separation, c.seed);
      const std::vector<int> rows = AllRows(all.size());
      const std::span<const int> span(rows);
      return ClassificationBundle(c, all.Subset(span.first(c.gaussian_samples)),
                                  all.Subset(span.subspan(c.gaussian_samples)));
    }
    case TaskKind::kQuadratic: {
      QuadraticTaskOptions o;
      o.dim = c.quadratic_dim;
      o.devices = c.devices;
      o.rows_per_device = c.quadratic_rows;
      o.heterogeneity = c.quadratic_heterogeneity;
      o.target_noise = c.quadratic_target_noise;
      o.seed = c.seed;
      QuadraticTask q = MakeQuadraticTask(o);
      TaskBundle out;
      out.arch = std::make_shared<LeastSquares>(c.quadratic_dim);
      out.partitions = std::move(q.devices);
      out.root = std::move(q.root);
      out.test = std::move(q.test);
      out.smoothness = q.smoothness;
      out.pl_constant = q.pl_constant;
      out.f_star = q.f_star;
      return out;
    }
  }
  throw ConfigError("unknown task");
}

std::string PlanSourceName(PlanSource source) {
  switch (source) {
    case PlanSource::kUniformSingle: return "uniform_single";
    case PlanSource::kUniformRandom: return "uniform_random";
    case PlanSource::kUniformSequential: return "uniform_sequential";
    case PlanSource::kOptimized: return "optimized";
    case PlanSource::kFallback: return "fallback";
  }
  return "unknown";
}

std::string MetricsCsvHeader() {
  return "round,test_accuracy,test_loss,global_loss,participants,surviving,"
         "active_clusters,noise,precision,recall,queue_max,lemma1_bound,"
         "contraction,offset,alpha_participating,skipped,filter_bypassed,"
         "power_violations,max_power_ratio,plan_source,planner_degraded";
}

std::string MetricsCsvRow(const RoundMetrics& m) {
  std::ostringstream out;
  out << m.round << ',' << Format(m.test_accuracy) << ',' << Format(m.test_loss)
      << ',' << Format(m.global_loss) << ',' << m.participants << ','
      << m.surviving << ',' << m.active_clusters << ',' << Format(m.noise)
      << ',' << Format(m.precision) << ',' << Format(m.recall) << ','
      << Format(m.queue_max) << ',' << Format(m.lemma1_bound) << ','
      << Format(m.contraction) << ',' << Format(m.offset) << ','
      << Format(m.alpha_participating) << ',' << m.skipped << ','
      << m.filter_bypassed << ',' << m.power_violations << ','
      << Format(m.max_power_ratio) << ',' << m.plan_source << ','
      << m.planner_degraded;
  return out.str();
}

Experiment::Experiment(const ExperimentConfig& config)
    : Experiment(config, (config.Validate(), BuildTask(config))) {}

Experiment::Experiment(const ExperimentConfig& config, TaskBundle task)
    : config_(config), task_(std::move(task)) {
  config_.Validate();
  if (static_cast<int>(task_.partitions.size()) != config_.devices) {
    throw ConfigError("task has the wrong number of device shards");
  }
  if (config_.eta * task_.smoothness >= 1.0) {
    throw ParameterError("learning rate must satisfy eta < 1/L");
  }
  Initialize();
}

void Experiment::Initialize() {
  const ExperimentConfig& c = config_;
  const bool ideal = c.scheme == Scheme::kIdeal;
  power_ = {DbmToWatts(c.p_max_dbm), c.clip_norm, ideal ? 0.0 : c.noise_power};
  power_.Validate();

  if (ideal || c.byzantine == 0) {
    roster_ = MakeRoster(c.devices, {});
  } else {
    std::mt19937_64 rng = Stream(c.seed, StreamTag::kRoster);
    roster_ = SampleRoster(rng, c.devices, c.byzantine);
  }
  std::mt19937_64 dist_rng = Stream(c.seed, StreamTag::kDistances);
  beta_ = LargeScaleFading(
      SampleDistances(dist_rng, c.devices, c.distance_near, c.distance_far));
  std::mt19937_64 init_rng = Stream(c.seed, StreamTag::kModelInit);
  model_ = MakeModel(task_.arch, init_rng);

  if (c.delta_override >= 0.0) {
    delta_ = Vec::Constant(c.devices, c.delta_override);
  } else {
    EstimateDeltas();
  }
  ledger_ = ReputationLedger(c.devices);
  excluded_mass_ = Vec::Zero(c.devices);
  queues_ = FairnessQueues(c.devices, c.fairness());
  contribution_sum_ = Vec::Zero(c.devices);
  penalty_ = c.absence_penalty >= 0.0 ? c.absence_penalty : c.provisional_penalty;
  noise_seed_ = c.seed;
}

void Experiment::EstimateDeltas() {
  const ExperimentConfig& c = config_;
  std::vector<Vec> checkpoints = {model_.w};
  Model pilot = model_;
  const int every = std::max(1, c.delta_checkpoint_every);
  for (int r = 1; r <= c.delta_pilot_rounds; ++r) {
    Vec step = Vec::Zero(pilot.dimension());
    for (int k = 0; k < c.devices; ++k) {
      const Dataset& shard = task_.partitions[k];
      std::mt19937_64 rng = Stream(c.seed, StreamTag::kDelta, r, k);
      const Minibatch batch = c.batch_size <= 0
                                  ? FullBatch(shard.size())
                                  : DrawMinibatch(rng, shard.size(), c.batch_size);
      step += ClipGradient(LocalGradient(pilot, batch, shard), c.clip_norm);
    }
    pilot.w -= c.eta * step / c.devices;
    if (r % every == 0) checkpoints.push_back(pilot.w);
  }
  DeltaEstimateOptions options;
  options.batch_size = c.batch_size;
  options.batches_per_checkpoint = c.delta_batches;
  options.margin = c.delta_margin;
  options.clip_norm = c.clip_norm;
  std::mt19937_64 rng = Stream(c.seed, StreamTag::kDelta, 0, 1u << 20);
  delta_ = EstimateDelta(model_, checkpoints, task_.partitions, options, rng);
}

Vec Experiment::MeanWeightedContribution() const {
  if (round_ == 0) return Vec::Zero(config_.devices);
  return contribution_sum_ / round_;
}

ClusterPlan Experiment::UniformPlan(PlanSource source,
                                    const RoundChannel& ch) const {
  const int k_total = config_.devices;
  switch (source) {
    case PlanSource::kUniformSequential:
    case PlanSource::kFallback:
      return UniformSequentialPlan(ch, config_.cluster_size());
    case PlanSource::kUniformRandom: {
      ClusterPlan plan;
      plan.alpha = Vec::Constant(k_total, 1.0 / k_total);
      std::mt19937_64 rng =
          Stream(config_.seed, StreamTag::kRandomClustering, round_);
      plan.clusters = RandomClusters(rng, k_total, config_.cluster_size());
      return plan;
    }
    default: {
      ClusterPlan plan;
      plan.alpha = Vec::Constant(k_total, 1.0 / k_total);
      plan.clusters = {AllRows(k_total)};
      return plan;
    }
  }
}

PreparedRound Experiment::Prepare() const {
  const ExperimentConfig& c = config_;
  const int k_total = c.devices;
  PreparedRound out;
  out.round = round_;

  std::mt19937_64 ch_rng = Stream(c.seed, StreamTag::kChannel, round_);
  const double threshold = c.scheme == Scheme::kIdeal ? 0.0 : c.truncation_threshold;
  out.channel = SampleRoundChannel(ch_rng, beta_, threshold);

  std::vector<Vec> grads(k_total);
  std::vector<Minibatch> batches(k_total);
  for (int k = 0; k < k_total; ++k) {
    const Dataset& shard = task_.partitions[k];
    std::mt19937_64 rng = Stream(c.seed, StreamTag::kBatch, round_, k);
    batches[k] = c.batch_size <= 0 ? FullBatch(shard.size())
                                   : DrawMinibatch(rng, shard.size(), c.batch_size);
    grads[k] = ClipGradient(LocalGradient(model_, batches[k], shard), c.clip_norm);
  }
  if (roster_.size() > 0 && c.attack != AttackTag::kNone) {
    AttackKind kind;
    kind.tag = c.attack;
    kind.gaussian_mean = c.gaussian_mean;
    kind.gaussian_std = c.gaussian_std;
    kind.full_power = c.byzantine_full_power;
    AttackContext ctx{&model_, task_.partitions, batches};
    std::mt19937_64 rng = Stream(c.seed, StreamTag::kAttack, round_);
    out.sent = ApplyAttack(kind, grads, roster_, ctx, rng);
  } else {
    out.sent = std::move(grads);
  }
  out.reported_norm_sq.resize(k_total);
  for (int k = 0; k < k_total; ++k) {
    out.reported_norm_sq[k] = roster_.is_byzantine(k)
                                  ? c.clip_norm * c.clip_norm
                                  : out.sent[k].squaredNorm();
  }
  if (c.suspects() > 0) out.suspects = IdentifyByzantine(ledger_, c.suspects());

  const Scheme s = c.scheme;
  const bool adaptive = s == Scheme::kFedsac && round_ >= c.init_rounds;
  if (adaptive) {
    PlannerConfig pc;
    pc.cluster_size = c.cluster_size();
    pc.num_clusters = c.clusters;
    pc.assumed_byzantine = c.suspects();
    pc.v = c.v;
    pc.smoothness = task_.smoothness;
    pc.eta = c.eta;
    pc.power = power_;
    if (c.noise_weight_per_dimension) {
      pc.noise_weight_scale = static_cast<double>(model_.dimension());
    }
    pc.scale = c.contribution_scale;
    pc.schedule.tau0 = c.tau0;
    pc.schedule.growth = c.tau_growth;
    pc.schedule.tau_max = c.tau_max;
    pc.schedule.chi = c.chi;
    pc.schedule.max_iterations = c.pccp_max_iterations;
    pc.schedule.relative_tolerance = c.pccp_tolerance;
    pc.schedule.structured_candidates = c.structured_candidates;
    PlanInputs in;
    in.channel = &out.channel;
    in.grad_norm_sq = out.reported_norm_sq;
    in.delta = delta_;
    in.queues = queues_.q;
    in.suspects = out.suspects;
    RoundPlan rp = PlanRound(pc, in);
    out.plan = std::move(rp.plan);
    out.source = rp.fallback ? PlanSource::kFallback : PlanSource::kOptimized;
    out.pool = std::move(rp.trusted);
    out.contributions = std::move(rp.contributions);
    out.planner_degraded = rp.solution.degraded;
  } else {
    switch (s) {
      case Scheme::kIdeal:
      case Scheme::kNonRobust:
        out.source = PlanSource::kUniformSingle;
        break;
      case Scheme::kNoAdaptiveWeighting:
        out.source = PlanSource::kUniformSequential;
        break;
      default:
        out.source = PlanSource::kUniformRandom;
        break;
    }
    out.plan = UniformPlan(out.source, out.channel);
    out.pool = out.channel.activated;
    out.contributions =
        ComputeContributions(out.reported_norm_sq, delta_, c.eta,
                             task_.smoothness, out.pool, c.contribution_scale);
  }
  const bool filtered = s != Scheme::kIdeal && s != Scheme::kNonRobust;
  if (filtered) out.root_gradient = RootGradient(model_, task_.root);
  return out;
}

AggregatedRound Experiment::Aggregate(const PreparedRound& p,
                                      std::mt19937_64& noise_rng) const {
  const ExperimentConfig& c = config_;
  AggregatedRound out;
  TransmitterRoles roles;
  if (c.byzantine_full_power && c.attack != AttackTag::kNone) {
    roles.full_power = roster_.flags;
  }
  out.aggregation =
      ClusterAggregate(p.plan, p.sent, p.channel, power_, roles, noise_rng);
  if (p.root_gradient.size() == 0) {
    out.filter = AcceptAllActive(out.aggregation.updates);
  } else {
    out.filter = CosineFilter(out.aggregation.updates, p.root_gradient,
                              c.cosine_threshold);
  }
  out.next_w = GlobalUpdate(model_.w, out.filter, out.aggregation.updates, c.eta);
  return out;
}

void Experiment::Evaluate(RoundMetrics& m) const {
  m.global_loss = GlobalLoss(model_, task_.partitions);
  const std::vector<int> rows = AllRows(task_.test.size());
  m.test_loss = task_.arch->Loss(model_.w, task_.test, rows);
  m.test_accuracy = task_.arch->Accuracy(model_.w, task_.test);
}

RoundMetrics Experiment::Commit(const PreparedRound& p, const AggregatedRound& r) {
  const ExperimentConfig& c = config_;
  const int k_total = c.devices;
  if (p.round != round_) throw ConfigError("prepared round is stale");
  RoundMetrics m;
  m.round = round_;
  m.plan_source = PlanSourceName(p.source);
  m.planner_degraded = p.planner_degraded;
  m.filter_bypassed = r.filter.bypassed;
  m.surviving = static_cast<int>(r.filter.surviving.size());
  for (const auto& u : r.aggregation.updates) m.active_clusters += u.active;
  m.skipped = r.filter.surviving.empty();

  std::vector<bool> survived(p.plan.clusters.size(), false);
  for (int n : r.filter.surviving) survived[n] = true;
  std::vector<Participation> status(k_total, Participation::kSilent);
  IndexSet participants;
  for (std::size_t n = 0; n < p.plan.clusters.size(); ++n) {
    IndexSet heard;
    for (int k : p.plan.clusters[n]) {
      if (!r.aggregation.transmitted[k]) continue;
      heard.push_back(k);
      status[k] = survived[n] ? Participation::kParticipated
                              : Participation::kExcluded;
      if (survived[n]) participants.push_back(k);
    }
    if (round_ < c.init_rounds && r.aggregation.updates[n].active) {
      tracker_.Record(heard, !survived[n]);
    }
  }
  std::sort(participants.begin(), participants.end());
  m.participants = static_cast<int>(participants.size());

  // Power of the honest transmitters.
  for (int k = 0; k < k_total; ++k) {
    if (roster_.is_byzantine(k)) continue;
    const double ratio = r.aggregation.transmit_power[k] / power_.p_max;
    m.max_power_ratio = std::max(m.max_power_ratio, ratio);
    if (r.aggregation.transmit_power[k] > power_.p_max) ++m.power_violations;
  }

  m.noise = EquivalentNoisePower(p.plan, r.filter.surviving, p.channel, power_);
  if (roster_.size() > 0 && !p.suspects.empty()) {
    int hit = 0;
    for (int k : p.suspects) hit += roster_.is_byzantine(k);
    m.precision = Ratio(hit, static_cast<int>(p.suspects.size()));
    m.recall = Ratio(hit, roster_.size());
  }

  ParticipantTerms terms{Vec(m.participants), Vec(m.participants),
                         Vec(m.participants)};
  for (int i = 0; i < m.participants; ++i) {
    const int k = participants[i];
    terms.alpha[i] = p.plan.alpha[k];
    terms.grad_norm_sq[i] = p.sent[k].squaredNorm();
    terms.delta[i] = delta_[k];
  }
  m.alpha_participating = terms.alpha.sum();
  if (c.analyze) {
    const double grad_sq = GlobalGradient(model_, task_.partitions).squaredNorm();
    m.lemma1_bound = Lemma1Bound(terms, grad_sq, m.noise, c.eta, task_.smoothness);
    if (task_.pl_constant > 0.0) {
      m.contraction = ContractionFactor(terms.alpha, task_.pl_constant, c.eta);
      m.offset = OffsetTerm(terms.alpha, terms.delta, c.clip_norm, m.noise,
                            c.eta, task_.smoothness);
    }
  }

  // Bookkeeping with the weights devices actually transmitted with.
  Vec alpha = p.plan.alpha;
  for (int k = 0; k < k_total; ++k) {
    if (!r.aggregation.transmitted[k]) alpha[k] = 0.0;
  }
  const Vec& gamma_bar = p.contributions.gamma_bar;
  UpdateReputation(ledger_, alpha, gamma_bar, status, penalty_);
  for (int k = 0; k < k_total; ++k) {
    if (status[k] == Participation::kExcluded) {
      excluded_mass_[k] += alpha[k] * gamma_bar[k];
    }
  }
  UpdateQueue(queues_, alpha, gamma_bar);
  contribution_sum_ += alpha.cwiseProduct(gamma_bar);
  m.queue_max = 0.0;
  for (int k = 0; k < k_total; ++k) {
    if (!roster_.is_byzantine(k)) m.queue_max = std::max(m.queue_max, queues_.q[k]);
  }

  model_.w = r.next_w;
  ++round_;
  MaybeSelectPenalty();

  m.global_loss = GlobalLoss(model_, task_.partitions);
  if (round_ % c.eval_every == 0) Evaluate(m);
  return m;
}

void Experiment::MaybeSelectPenalty() {
  const ExperimentConfig& c = config_;
  if (c.absence_penalty >= 0.0 || penalty_estimated_) return;
  if (round_ != c.init_rounds || c.suspects() == 0) return;
  const IndexSet suspects = IdentifyByzantine(ledger_, c.suspects());
  const ExclusionTracker::Estimate est = tracker_.Summarize(suspects, c.devices);
  if (!(est.p_hat > est.q_hat)) return;
  const double chosen = SelectAbsencePenalty(est.p_hat, est.q_hat);
  // Re-weight every exclusion recorded so far with the chosen penalty.
  ledger_.r -= (chosen - penalty_) * excluded_mass_;
  penalty_ = chosen;
  penalty_estimated_ = true;
}

RoundMetrics Experiment::Step() {
  const PreparedRound p = Prepare();
  std::mt19937_64 rng = Stream(noise_seed_, StreamTag::kClusterNoise, round_);
  const AggregatedRound r = Aggregate(p, rng);
  return Commit(p, r);
}

ExperimentSummary RunExperiment(const ExperimentConfig& config,
                                const std::string& output_dir) {
  const auto start = std::chrono::steady_clock::now();
  Experiment exp(config);
  ExperimentSummary out;
  std::ofstream csv;
  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    csv.open(output_dir + "/metrics.csv");
    if (!csv) throw std::runtime_error("cannot write " + output_dir + "/metrics.csv");
    csv << MetricsCsvHeader() << '\n' << std::flush;
  }
  RoundMetrics initial;
  exp.Evaluate(initial);

  const int total = config.effective_rounds();
  int skipped = 0;
  int violations = 0;
  int fallbacks = 0;
  int degraded = 0;
  double max_power = 0.0;
  double best_accuracy = initial.test_accuracy;
  double best_test_loss = initial.test_loss;
  for (int t = 0; t < total; ++t) {
    RoundMetrics m = exp.Step();
    if (t + 1 == total && std::isnan(m.test_loss)) exp.Evaluate(m);
    skipped += m.skipped;
    violations += m.power_violations;
    fallbacks += m.plan_source == "fallback";
    degraded += m.planner_degraded;
    max_power = std::max(max_power, m.max_power_ratio);
    if (!std::isnan(m.test_accuracy)) {
      best_accuracy = std::isnan(best_accuracy)
                          ? m.test_accuracy
                          : std::max(best_accuracy, m.test_accuracy);
    }
    if (!std::isnan(m.test_loss)) {
      best_test_loss = std::min(best_test_loss, m.test_loss);
    }
    if (csv.is_open()) csv << MetricsCsvRow(m) << '\n' << std::flush;
    out.rounds.push_back(std::move(m));
  }

  RoundMetrics final_state;
  exp.Evaluate(final_state);
  const IndexSet identified = config.suspects() > 0
                                  ? IdentifyByzantine(exp.ledger(), config.suspects())
                                  : IndexSet{};
  int tp = 0;
  for (int k : identified) tp += exp.roster().is_byzantine(k);
  const int fp = static_cast<int>(identified.size()) - tp;
  const int fn = exp.roster().size() - tp;
  const int tn = config.devices - tp - fp - fn;

  const Vec mean_credit = exp.MeanWeightedContribution();
  double worst_fairness = RoundMetrics::kNaN;
  for (int k = 0; k < config.devices; ++k) {
    if (exp.roster().is_byzantine(k)) continue;
    worst_fairness = std::isnan(worst_fairness) ? mean_credit[k]
                                                : std::min(worst_fairness, mean_credit[k]);
  }
  auto number = [](double x) { return std::isnan(x) ? json(nullptr) : json(x); };
  json& s = out.json;
  s["config"] = ToJson(config);
  s["seed"] = config.seed;
  s["rounds"] = total;
  s["initial"] = {{"test_accuracy", number(initial.test_accuracy)},
                  {"test_loss", number(initial.test_loss)},
                  {"global_loss", number(initial.global_loss)}};
  s["final"] = {{"test_accuracy", number(final_state.test_accuracy)},
                {"test_loss", number(final_state.test_loss)},
                {"global_loss", number(final_state.global_loss)}};
  s["best_test_accuracy"] = number(best_accuracy);
  s["best_test_loss"] = number(best_test_loss);
  if (exp.task().f_star) s["f_star"] = *exp.task().f_star;
  s["smoothness"] = exp.task().smoothness;
  s["pl_constant"] = exp.task().pl_constant;
  s["mean_delta"] = exp.delta().mean();
  s["identification"] = {{"identified", identified},
                         {"byzantine", exp.roster().byzantine},
                         {"true_positive", tp},
                         {"false_positive", fp},
                         {"false_negative", fn},
                         {"true_negative", tn}};
  s["absence_penalty"] = exp.absence_penalty();
  s["absence_penalty_estimated"] = exp.penalty_estimated();
  s["skipped_rounds"] = skipped;
  s["power_violations"] = violations;
  s["max_power_ratio"] = max_power;
  s["planner_fallbacks"] = fallbacks;
  s["planner_degraded"] = degraded;
  s["fairness_target"] = config.fairness();
  s["min_honest_mean_weighted_contribution"] = number(worst_fairness);
  s["mean_weighted_contribution"] = std::vector<double>(mean_credit.begin(), mean_credit.end());
  s["delta"] = std::vector<double>(exp.delta().begin(), exp.delta().end());
  s["final_queue_max"] = exp.queues().q.maxCoeff();
  s["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!output_dir.empty()) {
    std::ofstream js(output_dir + "/summary.json");
    js << s.dump(2) << '\n';
  }
  return out;
}

}  // namespace airfl
