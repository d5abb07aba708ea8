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

// Flat key-value run configuration.
//
//   # comment
//   chain.loop_inductance_nH = 5.7
//   drive.frequency_Hz = 2.55 GHz
//   geometry.radii_um = 150, 180, 210
//
// Keys carry their nominal unit in the name. Numeric values may instead
// carry an explicit suffix of the same dimension (Hz/kHz/MHz/GHz, s/ms/us/ns,
// T/mT/uT/G, m/mm/um/nm, H/nH, F/pF, W/mW, deg/rad).

#ifndef NVLOOP_CONFIG_HPP_
#define NVLOOP_CONFIG_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nvloop/errors.hpp"

namespace nvloop::config {

// Any malformed or out-of-range configuration value. Always names the key.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Physical dimension of a key, used to interpret unit suffixes.
enum class Dimension {
  kNone,
  kFrequency,
  kTime,
  kMagneticField,
  kLength,
  kInductance,
  kCapacitance,
  kPower,
  kAngle,
};

// Parses "<number> [unit]". `nominal_scale` converts a bare number to SI;
// a suffix overrides it. Throws ConfigError mentioning `key`.
double ParseQuantity(std::string_view text, Dimension dim, double nominal_scale,
                     std::string_view key);

class Config {
 public:
  static Config FromString(std::string_view text);
  static Config FromFile(const std::string& path);

  bool Has(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> Raw(const std::string& key) const;

  // Value converted to SI, or `fallback_si` when absent.
  double Quantity(const std::string& key, double fallback_si, Dimension dim,
                  double nominal_scale) const;
  std::vector<double> QuantityList(const std::string& key,
                                   std::vector<double> fallback_si,
                                   Dimension dim, double nominal_scale) const;
  long long Integer(const std::string& key, long long fallback) const;
  bool Boolean(const std::string& key, bool fallback) const;
  std::string String(const std::string& key, const std::string& fallback) const;
  // One of `choices`; ConfigError otherwise.
  std::string Choice(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& choices) const;

  void Set(const std::string& key, const std::string& value);

  // Throws ConfigError for the first key not in `known`.
  void RejectUnknown(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace nvloop::config

#endif  // NVLOOP_CONFIG_HPP_
