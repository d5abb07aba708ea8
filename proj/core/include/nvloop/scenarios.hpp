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

// Scenario runner behind the nvloop tool. Each scenario reads a Config,
// validates every parameter it uses (ConfigError naming the key) before any
// computation, writes CSV files into the output directory and returns the
// scalar results.

#ifndef NVLOOP_SCENARIOS_HPP_
#define NVLOOP_SCENARIOS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nvloop/config.hpp"

namespace nvloop::cli {

enum class Scenario { kTune, kMap, kEsr, kRabi, kOdmr, kCasr, kInductance };

std::optional<Scenario> ParseScenario(std::string_view name);
std::string_view ScenarioName(Scenario s);
const std::vector<std::string>& ScenarioNames();

struct RunOptions {
  std::filesystem::path output_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config's seed
};

struct ScenarioReport {
  std::string scenario;
  // Scalars in insertion order. `text` holds the exact rendering written to
  // report.txt.
  struct Entry {
    std::string key;
    double value = 0.0;
    std::string text;
  };
  std::vector<Entry> scalars;
  std::vector<std::filesystem::path> files;  // every emitted file

  void Add(std::string key, double value);
  // Full round-trip precision, used for echoed inputs.
  void AddExact(std::string key, double value);
  std::optional<double> Get(std::string_view key) const;
  std::string ToText() const;
};

// Every key understood by any scenario.
const std::set<std::string>& KnownKeys();

// Runs the scenario and writes report.txt next to its CSV files.
ScenarioReport RunScenario(Scenario scenario, const config::Config& cfg,
                           const RunOptions& opts);

// CSV number format: scientific, 12 significant digits.
std::string FormatCsvNumber(double v);

}  // namespace nvloop::cli

#endif  // NVLOOP_SCENARIOS_HPP_
