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


// Runs every acceptance suite and prints one PASS/FAIL line per criterion.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "checks.h"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  airfl::checks::SuiteOptions options;
  std::vector<std::string> only;
  app.add_option("--data-dir", options.data_dir, "MNIST subset directory");
  app.add_option("--config-dir", options.config_dir, "Directory holding the suite configs");
  app.add_option("--only", only, "Run only these suites (names or numbers)");
  app.add_flag("--verbose", options.verbose, "Progress lines on stderr");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::string> names =
      only.empty() ? airfl::checks::SuiteNames() : only;
  int failures = 0;
  for (const auto& name : names) {
    const auto result = airfl::checks::RunSuite(name, options);
    std::cout << airfl::checks::FormatResult(result) << std::endl;
    failures += !result.pass;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
