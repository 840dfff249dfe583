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

namespace cellfree {

inline constexpr double kIqrFloor = 1e-6;

/// Per-feature (x - median) / max(IQR, floor). Fitted on dB-scale features.
struct ScalerParams {
  Vector median;
  Vector iqr;

  Eigen::Index num_features() const { return median.size(); }
};

/// Quantile with linear interpolation between order statistics (position q * (n - 1)).
double quantile(Vector values, double q);

/// `samples` is n_samples x n_features; needs at least 4 rows.
ScalerParams robust_scale_fit(const Matrix& samples);

/// Scales every row of `samples` in place.
void robust_scale_apply(const ScalerParams& params, Matrix& samples);
Vector robust_scale_apply(const ScalerParams& params, const Vector& x);

}  // namespace cellfree
