// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The cellfree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cellfree/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cellfree {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text) {
  KeyValueFile kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(stripped).substr(0, eq));
    std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) throw DataError("config line " + std::to_string(line_no) + ": empty key");
    if (kv.entries_.contains(key)) throw DataError("config: duplicate key '" + key + "'");
    kv.entries_.emplace(std::move(key), std::move(value));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw DataError("config: '" + key + "' is not a number: " + it->second);
  }
}

long long KeyValueFile::get_int(const std::string& key, long long fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  long long v = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError("config: '" + key + "' is not an integer: " + s);
  }
  return v;
}

void KeyValueFile::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [key, value] : entries_) {
    if (!known.contains(key)) throw DataError("config: unknown key '" + key + "'");
  }
}

const std::set<std::string>& network_config_keys() {
  static const std::set<std::string> keys{
      "num_aps", "num_ues", "num_antennas", "area_m", "tau_c", "tau_p", "p_ul_w", "p_max_dl_w",
      "noise_power_w", "noise_power_dbm", "pathloss_offset_db", "pathloss_slope_db", "v_exponent",
      "correlation_model", "angular_spread_deg", "ap_placement", "seed"};
  return keys;
}

NetworkConfig network_config_from(const KeyValueFile& kv) {
  NetworkConfig cfg;
  cfg.num_aps = static_cast<int>(kv.get_int("num_aps", cfg.num_aps));
  cfg.num_ues = static_cast<int>(kv.get_int("num_ues", cfg.num_ues));
  cfg.num_antennas = static_cast<int>(kv.get_int("num_antennas", cfg.num_antennas));
  cfg.area_m = kv.get_double("area_m", cfg.area_m);
  cfg.tau_c = static_cast<int>(kv.get_int("tau_c", cfg.tau_c));
  cfg.tau_p = static_cast<int>(kv.get_int("tau_p", cfg.tau_p));
  cfg.p_ul = kv.get_double("p_ul_w", cfg.p_ul);
  cfg.p_max_dl = kv.get_double("p_max_dl_w", cfg.p_max_dl);
  if (kv.has("noise_power_w") && kv.has("noise_power_dbm")) {
    throw DataError("config: give either noise_power_w or noise_power_dbm, not both");
  }
  if (kv.has("noise_power_dbm")) cfg.noise_power = db_to_linear(kv.get_double("noise_power_dbm", -94.0) - 30.0);
  cfg.noise_power = kv.get_double("noise_power_w", cfg.noise_power);
  cfg.pathloss_offset_db = kv.get_double("pathloss_offset_db", cfg.pathloss_offset_db);
  cfg.pathloss_slope_db = kv.get_double("pathloss_slope_db", cfg.pathloss_slope_db);
  cfg.v_exponent = kv.get_double("v_exponent", cfg.v_exponent);
  cfg.angular_spread_deg = kv.get_double("angular_spread_deg", cfg.angular_spread_deg);
  cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(cfg.seed)));

  const std::string corr = kv.get_string("correlation_model", "uncorrelated");
  if (corr == "uncorrelated") {
    cfg.correlation = CorrelationModel::kUncorrelated;
  } else if (corr == "local-scattering") {
    cfg.correlation = CorrelationModel::kLocalScattering;
  } else {
    throw DataError("config: correlation_model must be uncorrelated or local-scattering");
  }
  const std::string placement = kv.get_string("ap_placement", "grid");
  if (placement == "grid") {
    cfg.ap_placement = ApPlacement::kGrid;
  } else if (placement == "uniform-random") {
    cfg.ap_placement = ApPlacement::kUniformRandom;
  } else {
    throw DataError("config: ap_placement must be grid or uniform-random");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  return cfg;
}

std::string to_config_text(const NetworkConfig& cfg) {
  std::ostringstream os;
  os << "num_aps = " << cfg.num_aps << '\n'
     << "num_ues = " << cfg.num_ues << '\n'
     << "num_antennas = " << cfg.num_antennas << '\n'
     << "area_m = " << format_double(cfg.area_m) << '\n'
     << "tau_c = " << cfg.tau_c << '\n'
     << "tau_p = " << cfg.tau_p << '\n'
     << "p_ul_w = " << format_double(cfg.p_ul) << '\n'
     << "p_max_dl_w = " << format_double(cfg.p_max_dl) << '\n'
     << "noise_power_w = " << format_double(cfg.noise_power) << '\n'
     << "pathloss_offset_db = " << format_double(cfg.pathloss_offset_db) << '\n'
     << "pathloss_slope_db = " << format_double(cfg.pathloss_slope_db) << '\n'
     << "v_exponent = " << format_double(cfg.v_exponent) << '\n'
     << "correlation_model = "
     << (cfg.correlation == CorrelationModel::kUncorrelated ? "uncorrelated" : "local-scattering") << '\n'
     << "angular_spread_deg = " << format_double(cfg.angular_spread_deg) << '\n'
     << "ap_placement = " << (cfg.ap_placement == ApPlacement::kGrid ? "grid" : "uniform-random") << '\n'
     << "seed = " << cfg.seed << '\n';
  return os.str();
}

}  // namespace cellfree
