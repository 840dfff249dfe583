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

#include "cellfree/heuristic.hpp"

#include <cmath>
#include <stdexcept>

namespace cellfree {
namespace {

void require_positive(const Matrix& beta, double p_max) {
  if (!(p_max > 0.0)) throw std::invalid_argument("power budget must be positive");
  if (beta.size() == 0 || !(beta.array() > 0.0).all()) throw std::invalid_argument("LSF gains must be positive");
}

}  // namespace

Vector fractional_heuristic(const Vector& beta_col, double v, double p_max) {
  require_positive(beta_col, p_max);
  const Vector shaped = beta_col.array().pow(v);
  return std::sqrt(p_max) * shaped / shaped.sum();
}

Matrix side_info_ratios(const Matrix& beta, double v, double p_max) {
  require_positive(beta, p_max);
  const Matrix shaped = beta.array().pow(v);
  const Vector row_sums = shaped.rowwise().sum();
  return std::sqrt(p_max) * (row_sums.cwiseInverse().asDiagonal() * shaped);
}

PowerAllocation equal_power(int num_ues, int num_aps, double p_max) {
  if (num_ues < 1 || num_aps < 1 || !(p_max > 0.0)) throw std::invalid_argument("equal_power: bad dimensions");
  return {Matrix::Constant(num_ues, num_aps, std::sqrt(p_max / num_ues))};
}

PowerAllocation heuristic_allocation(const Matrix& beta, double v, double p_max) {
  require_positive(beta, p_max);
  const Matrix shaped = beta.array().pow(v);
  const Vector col_sums = shaped.colwise().sum().transpose();
  const Matrix power = p_max * (shaped * col_sums.cwiseInverse().asDiagonal());
  return {power.cwiseSqrt()};
}

}  // namespace cellfree
