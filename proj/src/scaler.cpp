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

#include "cellfree/scaler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cellfree {

double quantile(Vector values, double q) {
  if (values.size() == 0) throw std::invalid_argument("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(pos));
  const auto hi = std::min<Eigen::Index>(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ScalerParams robust_scale_fit(const Matrix& samples) {
  if (samples.rows() < 4) throw std::invalid_argument("robust scaler needs at least 4 samples per feature");
  ScalerParams p{Vector(samples.cols()), Vector(samples.cols())};
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    const Vector col = samples.col(j);
    p.median[j] = quantile(col, 0.5);
    p.iqr[j] = std::max(quantile(col, 0.75) - quantile(col, 0.25), kIqrFloor);
  }
  return p;
}

void robust_scale_apply(const ScalerParams& params, Matrix& samples) {
  if (samples.cols() != params.num_features()) throw std::invalid_argument("scaler feature count mismatch");
  samples = (samples.rowwise() - params.median.transpose()).array().rowwise() / params.iqr.transpose().array();
}

Vector robust_scale_apply(const ScalerParams& params, const Vector& x) {
  if (x.size() != params.num_features()) throw std::invalid_argument("scaler feature count mismatch");
  return ((x - params.median).array() / params.iqr.array()).matrix();
}

}  // namespace cellfree
