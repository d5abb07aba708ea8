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

#include "nvloop/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "nvloop/constants.hpp"

namespace nvloop::config {
namespace {

std::string_view Trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string Quote(std::string_view s) { return "'" + std::string(s) + "'"; }

const std::vector<std::pair<std::string_view, double>>& Units(Dimension dim) {
  static const std::vector<std::pair<std::string_view, double>> kNone;
  static const std::vector<std::pair<std::string_view, double>> kFreq = {
      {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
  static const std::vector<std::pair<std::string_view, double>> kTime = {
      {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}};
  static const std::vector<std::pair<std::string_view, double>> kField = {
      {"T", 1.0}, {"mT", 1e-3}, {"uT", 1e-6}, {"nT", 1e-9},
      {"G", 1.0 / kGaussPerTesla}, {"mG", 1e-3 / kGaussPerTesla}};
  static const std::vector<std::pair<std::string_view, double>> kLength = {
      {"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}};
  static const std::vector<std::pair<std::string_view, double>> kInd = {
      {"H", 1.0}, {"uH", 1e-6}, {"nH", 1e-9}, {"pH", 1e-12}};
  static const std::vector<std::pair<std::string_view, double>> kCap = {
      {"F", 1.0}, {"nF", 1e-9}, {"pF", 1e-12}, {"fF", 1e-15}};
  static const std::vector<std::pair<std::string_view, double>> kPower = {
      {"W", 1.0}, {"mW", 1e-3}};
  static const std::vector<std::pair<std::string_view, double>> kAngle = {
      {"rad", 1.0}, {"deg", kPi / 180.0}};
  switch (dim) {
    case Dimension::kFrequency: return kFreq;
    case Dimension::kTime: return kTime;
    case Dimension::kMagneticField: return kField;
    case Dimension::kLength: return kLength;
    case Dimension::kInductance: return kInd;
    case Dimension::kCapacitance: return kCap;
    case Dimension::kPower: return kPower;
    case Dimension::kAngle: return kAngle;
    case Dimension::kNone: break;
  }
  return kNone;
}

}  // namespace

double ParseQuantity(std::string_view text, Dimension dim, double nominal_scale,
                     std::string_view key) {
  const std::string_view s = Trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr == s.data()) {
    throw ConfigError(std::string(key) + ": expected a number, got " +
                      Quote(text));
  }
  if (!std::isfinite(value)) {
    throw ConfigError(std::string(key) + ": value must be finite");
  }
  const std::string_view suffix =
      Trim(s.substr(static_cast<size_t>(ptr - s.data())));
  if (suffix.empty()) return value * nominal_scale;
  for (const auto& [name, scale] : Units(dim)) {
    if (suffix == name) return value * scale;
  }
  throw ConfigError(std::string(key) + ": unknown unit " + Quote(suffix));
}

Config Config::FromString(std::string_view text) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) {
      v = v.substr(0, hash);
    }
    v = Trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key(Trim(v.substr(0, eq)));
    const std::string value(Trim(v.substr(eq + 1)));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    if (cfg.values_.contains(key)) {
      throw ConfigError(key + ": duplicate key on line " +
                        std::to_string(line_no));
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

Config Config::FromFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + Quote(path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return FromString(ss.str());
}

std::optional<std::string> Config::Raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double Config::Quantity(const std::string& key, double fallback_si,
                        Dimension dim, double nominal_scale) const {
  const auto raw = Raw(key);
  if (!raw) return fallback_si;
  return ParseQuantity(*raw, dim, nominal_scale, key);
}

std::vector<double> Config::QuantityList(const std::string& key,
                                         std::vector<double> fallback_si,
                                         Dimension dim,
                                         double nominal_scale) const {
  const auto raw = Raw(key);
  if (!raw) return fallback_si;
  std::vector<double> out;
  std::string_view rest = *raw;
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(ParseQuantity(rest.substr(0, comma), dim, nominal_scale, key));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

long long Config::Integer(const std::string& key, long long fallback) const {
  const auto raw = Raw(key);
  if (!raw) return fallback;
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), v);
  if (ec != std::errc() || ptr != raw->data() + raw->size()) {
    throw ConfigError(key + ": expected an integer, got " + Quote(*raw));
  }
  return v;
}

bool Config::Boolean(const std::string& key, bool fallback) const {
  const auto raw = Raw(key);
  if (!raw) return fallback;
  if (*raw == "true" || *raw == "1" || *raw == "yes") return true;
  if (*raw == "false" || *raw == "0" || *raw == "no") return false;
  throw ConfigError(key + ": expected true/false, got " + Quote(*raw));
}

std::string Config::String(const std::string& key,
                           const std::string& fallback) const {
  return Raw(key).value_or(fallback);
}

std::string Config::Choice(const std::string& key, const std::string& fallback,
                           const std::vector<std::string>& choices) const {
  const std::string v = String(key, fallback);
  if (std::find(choices.begin(), choices.end(), v) == choices.end()) {
    std::string all;
    for (const auto& c : choices) all += (all.empty() ? "" : "|") + c;
    throw ConfigError(key + ": expected one of " + all + ", got " + Quote(v));
  }
  return v;
}

void Config::Set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

void Config::RejectUnknown(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (!known.contains(key)) throw ConfigError(key + ": unknown key");
  }
}

}  // namespace nvloop::config
