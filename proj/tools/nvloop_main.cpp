// Copyright 2026 The nvloop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// nvloop <scenario> --config <file> [--out <dir>] [--seed <n>]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical error (impedance
// pole, conductor clearance, flat objective), 1 anything else.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nvloop/config.hpp"
#include "nvloop/errors.hpp"
#include "nvloop/scenarios.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV microwave drive loop: design and verification scenarios"};
  std::string scenario_name;
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;

  app.add_option("scenario", scenario_name, "Scenario to run")
      ->required()
      ->check(CLI::IsMember(nvloop::cli::ScenarioNames()));
  app.add_option("--config", config_path, "Key-value configuration file")
      ->required();
  app.add_option("--out", out_dir, "Output directory for CSV files and report.txt");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for readout noise");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  nvloop::cli::RunOptions opts;
  opts.output_dir = out_dir;
  if (*seed_opt) opts.seed = seed;

  try {
    const auto cfg = nvloop::config::Config::FromFile(config_path);
    const auto scenario = *nvloop::cli::ParseScenario(scenario_name);
    const auto report = nvloop::cli::RunScenario(scenario, cfg, opts);
    std::cout << report.ToText();
    return 0;
  } catch (const nvloop::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nvloop::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
