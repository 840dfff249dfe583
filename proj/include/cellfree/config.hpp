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

#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

#include "cellfree/network.hpp"

namespace cellfree {

/// Flat `key = value` file. `#` starts a comment; blank lines are ignored.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text);
  static KeyValueFile load(const std::string& path);

  bool has(const std::string& key) const { return entries_.contains(key); }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;

  /// Throws DataError naming the first key not in `known`.
  void reject_unknown(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

const std::set<std::string>& network_config_keys();

/// Keys absent from the file keep their NetworkConfig defaults.
NetworkConfig network_config_from(const KeyValueFile& kv);

/// Canonical text form; parsing it back yields an identical config.
std::string to_config_text(const NetworkConfig& cfg);

}  // namespace cellfree
