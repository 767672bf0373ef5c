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

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "airfl/config.h"
#include "airfl/harness.h"
#include "checks.h"

namespace {

using airfl::ExperimentConfig;

struct Axis {
  std::string key;
  std::vector<std::string> values;
};

Axis ParseAxis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw CLI::ValidationError("--vary", "expected key=v1,v2,... but got " + spec);
  }
  Axis axis{spec.substr(0, eq), {}};
  std::string rest = spec.substr(eq + 1);
  std::size_t start = 0;
  while (start <= rest.size()) {
    const auto comma = rest.find(',', start);
    const auto end = comma == std::string::npos ? rest.size() : comma;
    if (end > start) axis.values.push_back(rest.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return axis;
}

void PrintSummaryLine(const std::string& label, const nlohmann::json& s) {
  auto show = [](const nlohmann::json& x) {
    return x.is_null() ? std::string("nan") : std::to_string(x.get<double>());
  };
  std::printf("%-40s acc=%s test_loss=%s global_loss=%s tp=%d/%zu wall=%.2fs\n",
              label.c_str(), show(s["final"]["test_accuracy"]).c_str(),
              show(s["final"]["test_loss"]).c_str(),
              show(s["final"]["global_loss"]).c_str(),
              s["identification"]["true_positive"].get<int>(),
              s["identification"]["byzantine"].size(),
              s["wall_seconds"].get<double>());
}

int RunCommand(const std::string& config_path, const std::string& out_dir,
               const std::vector<std::string>& overrides) {
  ExperimentConfig config = airfl::LoadConfig(config_path);
  for (const auto& o : overrides) {
    const Axis axis = ParseAxis(o);
    if (axis.values.size() != 1) {
      throw CLI::ValidationError("--set", "expected key=value but got " + o);
    }
    airfl::SetConfigValue(config, axis.key, axis.values.front());
  }
  config.Validate();
  const auto summary = airfl::RunExperiment(config, out_dir);
  PrintSummaryLine(out_dir, summary.json);
  return 0;
}

int SweepCommand(const std::string& config_path, const std::string& out_dir,
                 const std::vector<std::string>& vary) {
  const ExperimentConfig base = airfl::LoadConfig(config_path);
  std::vector<Axis> axes;
  for (const auto& v : vary) axes.push_back(ParseAxis(v));

  // Cartesian product, last axis fastest.
  std::vector<std::size_t> index(axes.size(), 0);
  while (true) {
    ExperimentConfig config = base;
    std::string label;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const std::string& value = axes[a].values[index[a]];
      airfl::SetConfigValue(config, axes[a].key, value);
      if (!label.empty()) label += "_";
      label += axes[a].key + "=" + value;
    }
    if (label.empty()) label = "base";
    config.Validate();
    const auto summary = airfl::RunExperiment(config, out_dir + "/" + label);
    PrintSummaryLine(label, summary.json);

    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++index[a] < axes[a].values.size()) break;
      index[a] = 0;
      if (a == 0) return 0;
    }
    if (axes.empty()) return 0;
  }
}

int OracleCommand(const std::string& suite, const std::string& data_dir,
                  const std::string& config_dir) {
  airfl::checks::SuiteOptions options;
  options.data_dir = data_dir;
  options.config_dir = config_dir;
  options.verbose = true;
  std::vector<std::string> names;
  if (suite == "all") {
    names = airfl::checks::SuiteNames();
  } else {
    names = {suite};
  }
  bool ok = true;
  for (const auto& name : names) {
    const auto result = airfl::checks::RunSuite(name, options);
    std::cout << airfl::checks::FormatResult(result) << std::endl;
    ok = ok && result.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Over-the-air federated learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "runs/latest";
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory for metrics.csv and summary.json");
  run->add_option("--set", overrides, "Override a config key, key=value");

  std::vector<std::string> vary;
  std::string sweep_dir = "runs/sweep";
  auto* sweep = app.add_subcommand("sweep", "Run the Cartesian product of varied keys");
  sweep->add_option("--config", config_path, "Base JSON config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--vary", vary, "key=v1,v2,... (repeatable)")->required();
  sweep->add_option("--out", sweep_dir, "Parent output directory");

  std::string suite;
  std::string data_dir = "data/mnist";
  std::string config_dir = "configs";
  auto* oracle = app.add_subcommand("oracle-check", "Run an oracle or acceptance suite");
  std::string suite_help = "Suite name or number; one of all";
  for (const auto& n : airfl::checks::SuiteNames()) suite_help += ", " + n;
  oracle->add_option("--suite", suite, suite_help)->required();
  oracle->add_option("--data-dir", data_dir, "MNIST subset directory");
  oracle->add_option("--config-dir", config_dir, "Directory holding the suite configs");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return RunCommand(config_path, out_dir, overrides);
    if (*sweep) return SweepCommand(config_path, sweep_dir, vary);
    if (*oracle) return OracleCommand(suite, data_dir, config_dir);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
