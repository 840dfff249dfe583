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
#include <iosfwd>
#include <vector>

#include "cellfree/common.hpp"
#include "cellfree/estimation.hpp"
#include "cellfree/network.hpp"

namespace cellfree {

enum class Precoder { kMR, kRZF };

struct Precoders {
  ChannelTensor w;          // unit-norm (or zero when degenerate)
  std::size_t degenerate = 0;
};

/// Local MR or RZF precoders, normalized per coherence block.
Precoders compute_precoders(const ChannelBatch& batch, Precoder scheme, double p_ul, double sigma2);

/// Statistics of the hardening bound. B is indexed b(k, i) -> L x L matrix.
struct SEParameters {
  int num_ues = 0;
  int num_aps = 0;
  Matrix a;                  // K x L, nonnegative
  std::vector<Matrix> B;     // K*K matrices, index k * K + i
  double sigma2 = 0.0;
  double prelog = 1.0;
  std::uint64_t n_real = 0;
  double max_imag_residue = 0.0;  // max_kl |Im E{h^H w}| / |E{h^H w}|
  std::size_t residue_warnings = 0;

  const Matrix& b(int k, int i) const { return B[static_cast<std::size_t>(k) * num_ues + i]; }
  Matrix& b(int k, int i) { return B[static_cast<std::size_t>(k) * num_ues + i]; }
};

inline constexpr std::size_t kMinRealizations = 100;
inline constexpr double kImagResidueWarn = 0.01;

/// Monte-Carlo estimate of a and B from one batch. Requires at least 100 realizations.
SEParameters estimate_se_parameters(const ChannelBatch& batch, const Precoders& precoders,
                                    const NetworkConfig& cfg);

/// Square-root powers mu(k, l) in sqrt(W).
struct PowerAllocation {
  Matrix mu;  // K x L
};

/// Largest per-AP budget excess relative to p_max (<= 0 when feasible).
double max_budget_violation(const PowerAllocation& alloc, double p_max);
bool is_feasible(const PowerAllocation& alloc, double p_max, double rel_tol = 1e-9);

Vector compute_sinr(const SEParameters& params, const Matrix& mu);

/// Per-UE SE in bit/s/Hz. Throws std::invalid_argument on infeasible or negative allocations.
Vector compute_se(const SEParameters& params, const PowerAllocation& alloc, double p_max);

/// Binary container: magic "CFSE", u32 version, u32 K, u32 L, f64 prelog, f64 sigma2, u64 n_real,
/// then a (row-major) and every B_ki (row-major, k-major then i), all little-endian.
void write_se_parameters(std::ostream& out, const SEParameters& params);
SEParameters read_se_parameters(std::istream& in);

/// FNV-1a digest over the serialized form; used to prove two strategies saw the same statistics.
std::uint64_t digest(const SEParameters& params);

}  // namespace cellfree
