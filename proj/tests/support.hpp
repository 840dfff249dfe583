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

#include <cstdint>

#include "cellfree/pipeline.hpp"

namespace support {

inline cellfree::NetworkConfig small_network(int L, int K, int N, int tau_p, double area = 500.0) {
  cellfree::NetworkConfig cfg;
  cfg.num_aps = L;
  cfg.num_ues = K;
  cfg.num_antennas = N;
  cfg.area_m = area;
  cfg.tau_p = tau_p;
  cfg.ap_placement = cellfree::ApPlacement::kUniformRandom;
  return cfg;
}

inline cellfree::NetworkConfig desk_network() {
  cellfree::NetworkConfig cfg;
  cfg.num_aps = 4;
  cfg.num_ues = 6;
  cfg.num_antennas = 2;
  cfg.area_m = 500.0;
  cfg.tau_p = 3;
  return cfg;
}

inline cellfree::PipelineConfig desk_pipeline() {
  cellfree::PipelineConfig cfg;
  cfg.network = desk_network();
  cfg.realizations = 500;
  cfg.cluster_size = 2;
  return cfg;
}

// Fails the current test (via exception) when an allocation breaks a per-AP budget.
inline void require_feasible(const cellfree::Matrix& mu, double p_max) {
  if (!cellfree::is_feasible({mu}, p_max, 1e-9) || (mu.array() < 0.0).any()) {
    throw std::logic_error("infeasible allocation");
  }
}

}  // namespace support
