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

// Acceptance suites shared by the acceptance binary and the command line.

#ifndef AIRFL_TOOLS_CHECKS_H_
#define AIRFL_TOOLS_CHECKS_H_

#include <string>
#include <vector>

namespace airfl::checks {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;  // 0 when the suite has no runtime limit
};

struct SuiteOptions {
  std::string data_dir = "data/mnist";
  std::string config_dir = "configs";
  bool verbose = false;  // progress lines on stderr
};

// Suite names, in criterion order.
const std::vector<std::string>& SuiteNames();

// Runs one suite by name or by its criterion number ("1".."9").
// Throws std::invalid_argument for an unknown suite.
CheckResult RunSuite(const std::string& name, const SuiteOptions& options);

std::string FormatResult(const CheckResult& result);

}  // namespace airfl::checks

#endif  // AIRFL_TOOLS_CHECKS_H_
