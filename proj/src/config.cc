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

#include "airfl/config.h"

#include <fstream>
#include <set>
#include <sstream>

namespace airfl {
namespace {

using nlohmann::json;

std::string ScaleName(ContributionScale s) {
  return s == ContributionScale::kMeanOne ? "mean_one" : "sum_one";
}

ContributionScale ParseScale(const std::string& name) {
  if (name == "mean_one") return ContributionScale::kMeanOne;
  if (name == "sum_one") return ContributionScale::kSumOne;
  throw ConfigError("unknown contribution_scale: " + name);
}

// Calls f(key, field) for every configurable field.
template <class Config, class F>
void VisitFields(Config& c, F&& f) {
  f("devices", c.devices);
  f("byzantine", c.byzantine);
  f("clusters", c.clusters);
  f("assumed_byzantine", c.assumed_byzantine);
  f("scheme", c.scheme);
  f("attack", c.attack);
  f("gaussian_mean", c.gaussian_mean);
  f("gaussian_std", c.gaussian_std);
  f("byzantine_full_power", c.byzantine_full_power);
  f("truncation_threshold", c.truncation_threshold);
  f("p_max_dbm", c.p_max_dbm);
  f("noise_power", c.noise_power);
  f("distance_near", c.distance_near);
  f("distance_far", c.distance_far);
  f("clip_norm", c.clip_norm);
  f("task", c.task);
  f("data_dir", c.data_dir);
  f("model", c.model);
  f("train_samples", c.train_samples);
  f("test_samples", c.test_samples);
  f("hidden_units", c.hidden_units);
  f("labels_per_device", c.labels_per_device);
  f("root_fraction", c.root_fraction);
  f("quadratic_dim", c.quadratic_dim);
  f("quadratic_rows", c.quadratic_rows);
  f("quadratic_heterogeneity", c.quadratic_heterogeneity);
  f("quadratic_target_noise", c.quadratic_target_noise);
  f("gaussian_samples", c.gaussian_samples);
  f("gaussian_features", c.gaussian_features);
  f("gaussian_classes", c.gaussian_classes);
  f("gaussian_separation", c.gaussian_separation);
  f("eta", c.eta);
  f("batch_size", c.batch_size);
  f("rounds", c.rounds);
  f("init_rounds", c.init_rounds);
  f("eval_every", c.eval_every);
  f("resource_budget", c.resource_budget);
  f("smoothness", c.smoothness);
  f("pl_constant", c.pl_constant);
  f("cosine_threshold", c.cosine_threshold);
  f("v", c.v);
  f("fairness_target", c.fairness_target);
  f("absence_penalty", c.absence_penalty);
  f("provisional_penalty", c.provisional_penalty);
  f("contribution_scale", c.contribution_scale);
  f("tau0", c.tau0);
  f("tau_growth", c.tau_growth);
  f("tau_max", c.tau_max);
  f("chi", c.chi);
  f("pccp_max_iterations", c.pccp_max_iterations);
  f("pccp_tolerance", c.pccp_tolerance);
  f("structured_candidates", c.structured_candidates);
  f("noise_weight_per_dimension", c.noise_weight_per_dimension);
  f("analyze", c.analyze);
  f("delta_pilot_rounds", c.delta_pilot_rounds);
  f("delta_checkpoint_every", c.delta_checkpoint_every);
  f("delta_batches", c.delta_batches);
  f("delta_margin", c.delta_margin);
  f("delta_override", c.delta_override);
  f("seed", c.seed);
}

json Encode(Scheme v) { return SchemeName(v); }
json Encode(TaskKind v) { return TaskName(v); }
json Encode(AttackTag v) { return AttackTagName(v); }
json Encode(ContributionScale v) { return ScaleName(v); }
template <class T>
json Encode(const T& v) {
  return v;
}

void Decode(const json& j, Scheme& v) { v = ParseScheme(j.get<std::string>()); }
void Decode(const json& j, TaskKind& v) { v = ParseTask(j.get<std::string>()); }
void Decode(const json& j, AttackTag& v) { v = ParseAttackTag(j.get<std::string>()); }
void Decode(const json& j, ContributionScale& v) {
  v = ParseScale(j.get<std::string>());
}
template <class T>
void Decode(const json& j, T& v) {
  v = j.get<T>();
}

void Parse(const std::string& s, Scheme& v) { v = ParseScheme(s); }
void Parse(const std::string& s, TaskKind& v) { v = ParseTask(s); }
void Parse(const std::string& s, AttackTag& v) { v = ParseAttackTag(s); }
void Parse(const std::string& s, ContributionScale& v) { v = ParseScale(s); }
void Parse(const std::string& s, std::string& v) { v = s; }
void Parse(const std::string& s, bool& v) {
  if (s == "true" || s == "1") {
    v = true;
  } else if (s == "false" || s == "0") {
    v = false;
  } else {
    throw ConfigError("not a boolean: " + s);
  }
}
template <class T>
void Parse(const std::string& s, T& v) {
  std::istringstream in(s);
  T parsed{};
  in >> parsed;
  if (in.fail() || !in.eof()) throw ConfigError("cannot parse value: " + s);
  v = parsed;
}

}  // namespace

Scheme ParseScheme(const std::string& name) {
  if (name == "fedsac") return Scheme::kFedsac;
  if (name == "ideal") return Scheme::kIdeal;
  if (name == "non_robust") return Scheme::kNonRobust;
  if (name == "random_clustering") return Scheme::kRandomClustering;
  if (name == "no_adaptive_weighting") return Scheme::kNoAdaptiveWeighting;
  throw ConfigError("unknown scheme: " + name);
}

std::string SchemeName(Scheme scheme) {
  switch (scheme) {
    case Scheme::kFedsac: return "fedsac";
    case Scheme::kIdeal: return "ideal";
    case Scheme::kNonRobust: return "non_robust";
    case Scheme::kRandomClustering: return "random_clustering";
    case Scheme::kNoAdaptiveWeighting: return "no_adaptive_weighting";
  }
  return "unknown";
}

TaskKind ParseTask(const std::string& name) {
  if (name == "mnist") return TaskKind::kMnist;
  if (name == "quadratic") return TaskKind::kQuadratic;
  if (name == "gaussian") return TaskKind::kGaussian;
  throw ConfigError("unknown task: " + name);
}

std::string TaskName(TaskKind task) {
  switch (task) {
    case TaskKind::kMnist: return "mnist";
    case TaskKind::kQuadratic: return "quadratic";
    case TaskKind::kGaussian: return "gaussian";
  }
  return "unknown";
}

int ExperimentConfig::effective_rounds() const {
  return resource_budget > 0 ? resource_budget / clusters : rounds;
}

void ExperimentConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(devices >= 1, "devices must be positive");
  require(clusters >= 1 && devices % clusters == 0,
          "devices must be a multiple of clusters");
  require(byzantine >= 0 && byzantine < devices, "need 0 <= byzantine < devices");
  require(suspects() < devices, "assumed_byzantine must be below devices");
  require(eta > 0.0, "eta must be positive");
  require(rounds >= 0 && init_rounds >= 0, "round counts must be nonnegative");
  require(eval_every >= 1, "eval_every must be positive");
  require(clip_norm > 0.0, "clip_norm must be positive");
  require(noise_power >= 0.0, "noise_power must be nonnegative");
  require(distance_near > 0.0 && distance_far >= distance_near,
          "distance range must be positive and ordered");
  require(root_fraction > 0.0 && root_fraction < 1.0,
          "root_fraction must lie in (0, 1)");
  require(model == "mlp" || model == "linear_softmax",
          "model must be mlp or linear_softmax");
  require(tau_growth > 1.0 && tau0 > 0.0 && tau_max >= tau0,
          "penalty schedule must grow from a positive start");
}

json ToJson(const ExperimentConfig& config) {
  json j = json::object();
  VisitFields(config, [&](const char* key, const auto& field) {
    j[key] = Encode(field);
  });
  return j;
}

ExperimentConfig ConfigFromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig config;
  std::set<std::string> known;
  VisitFields(config, [&](const char* key, auto& field) {
    known.insert(key);
    if (!j.contains(key)) return;
    try {
      Decode(j.at(key), field);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value for ") + key + ": " + e.what());
    }
  });
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw ConfigError("unknown key: " + item.key());
  }
  config.Validate();
  return config;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
  return ConfigFromJson(j);
}

void SetConfigValue(ExperimentConfig& config, const std::string& key,
                    const std::string& value) {
  bool found = false;
  VisitFields(config, [&](const char* name, auto& field) {
    if (key == name) {
      Parse(value, field);
      found = true;
    }
  });
  if (!found) throw ConfigError("unknown key: " + key);
}

}  // namespace airfl
