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

#include <cstddef>
#include <vector>

#include "cellfree/common.hpp"
#include "cellfree/mlp.hpp"
#include "cellfree/network.hpp"
#include "cellfree/precoding.hpp"

namespace cellfree {

/// Cluster index per AP. APs are ordered by (y, x) position, then cut into contiguous blocks of c.
/// Throws std::invalid_argument when c does not divide L.
std::vector<int> cluster_partition(int num_aps, int cluster_size, const std::vector<Point>& ap_positions);

/// AP indices of every cluster, in the order used for CDNN inputs and outputs.
std::vector<std::vector<int>> cluster_members(const std::vector<int>& partition);

/// Unscaled (dB) input vector of one model.
///   DDNN:    dB of the fractional heuristic column of AP `aps[0]`
///   DDNN-SI: the above followed by dB of the side-information ratios of that AP
///   CDNN:    dB of beta for every AP in `aps`, AP-major
Vector model_features(ModelKind kind, const Matrix& beta, double v, double p_max, const std::vector<int>& aps);

/// Training target: for every AP in `aps`, mu*_{:,l} followed by sum_k mu*_kl^2.
Vector model_label(const Matrix& mu_star, const std::vector<int>& aps);

/// One model per AP (distributed kinds) or per cluster (CDNN).
struct LearnedAllocator {
  ModelKind kind = ModelKind::kDDNN;
  std::vector<MlpModel> models;
  std::vector<std::vector<int>> groups;  // AP indices served by models[j]

  void validate(int num_ues, int num_aps) const;
};

struct LearnedPrediction {
  PowerAllocation alloc;
  std::size_t degenerate_aps = 0;  // APs whose predicted direction was all zeros
};

/// Runs every model on its local features; per AP, the K outputs give the direction and the extra
/// output the total power, capped at p_max. The result is always budget-feasible.
LearnedPrediction predict_allocation(const LearnedAllocator& allocator, const Matrix& beta, double v,
                                     double p_max);

/// Scaled inputs of every model, in model order.
std::vector<Vector> prepare_features(const LearnedAllocator& allocator, const Matrix& beta, double v, double p_max);

/// Inference and post-processing on inputs from prepare_features.
LearnedPrediction predict_from_features(const LearnedAllocator& allocator, const std::vector<Vector>& features,
                                        int num_ues, int num_aps, double p_max);

/// Turns one model's raw output into the columns of `aps`. Returns the number of zero directions.
std::size_t postprocess_output(const Vector& output, const std::vector<int>& aps, int num_ues, double p_max,
                               Matrix& mu);

}  // namespace cellfree
