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

#include "cellfree/common.hpp"
#include "cellfree/precoding.hpp"

namespace cellfree {

/// sqrt(P) * beta_kl^v / sum_i beta_il^v for one AP column.
Vector fractional_heuristic(const Vector& beta_col, double v, double p_max);

/// sqrt(P) * beta_kl^v / sum_l' beta_kl'^v; one ratio per (UE, AP).
Matrix side_info_ratios(const Matrix& beta, double v, double p_max);

PowerAllocation equal_power(int num_ues, int num_aps, double p_max);

/// Baseline allocator: powers proportional to beta^v within each AP, using the full budget.
PowerAllocation heuristic_allocation(const Matrix& beta, double v, double p_max);

}  // namespace cellfree
