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
#include <vector>

#include "cellfree/common.hpp"
#include "cellfree/network.hpp"

namespace cellfree {

/// Zero-based pilot index per UE (values in [0, tau_p)).
struct PilotAssignment {
  std::vector<int> pilot;
};

/// Greedy master-AP pilot assignment. The first min(tau_p, K) UEs take pilots in index order;
/// each later UE takes the pilot with the least accumulated LSF at its strongest AP.
/// Ties go to the lowest index.
PilotAssignment assign_pilots(const Matrix& beta, int tau_p);

/// Dense block of per-realization channel vectors, laid out [realization][ue][ap][antenna].
class ChannelTensor {
 public:
  ChannelTensor() = default;
  ChannelTensor(int n_real, int num_ues, int num_aps, int num_antennas)
      : n_real_(n_real), num_ues_(num_ues), num_aps_(num_aps), num_antennas_(num_antennas),
        data_(static_cast<std::size_t>(n_real) * num_ues * num_aps * num_antennas, Complex{}) {}

  int n_real() const { return n_real_; }
  int num_ues() const { return num_ues_; }
  int num_aps() const { return num_aps_; }
  int num_antennas() const { return num_antennas_; }

  Eigen::Map<CVector> at(int r, int k, int l) { return Eigen::Map<CVector>(ptr(r, k, l), num_antennas_); }
  Eigen::Map<const CVector> at(int r, int k, int l) const {
    return Eigen::Map<const CVector>(ptr(r, k, l), num_antennas_);
  }

 private:
  std::size_t offset(int r, int k, int l) const {
    return ((static_cast<std::size_t>(r) * num_ues_ + k) * num_aps_ + l) * num_antennas_;
  }
  Complex* ptr(int r, int k, int l) { return data_.data() + offset(r, k, l); }
  const Complex* ptr(int r, int k, int l) const { return data_.data() + offset(r, k, l); }

  int n_real_ = 0;
  int num_ues_ = 0;
  int num_aps_ = 0;
  int num_antennas_ = 0;
  std::vector<Complex> data_;
};

/// True channels h_kl ~ CN(0, R_kl), one independent draw per coherence block.
ChannelTensor sample_channels(const ChannelStatistics& stats, int n_real, std::uint64_t seed);

struct ChannelBatch {
  ChannelTensor h;
  ChannelTensor h_hat;
  std::vector<CMatrix> psi;  // K*L received-pilot correlation matrices, index k * L + l

  int n_real() const { return h.n_real(); }
  const CMatrix& psi_at(int k, int l) const { return psi[static_cast<std::size_t>(k) * h.num_aps() + l]; }
};

/// Psi_kl = sum over pilot-sharing UEs i of tau_p p R_il, plus sigma^2 I.
std::vector<CMatrix> pilot_correlations(const ChannelStatistics& stats, const PilotAssignment& pilots,
                                        const NetworkConfig& cfg);

/// MMSE estimates from seeded pilot-noise draws. Takes ownership of the true channels.
ChannelBatch mmse_estimate(ChannelTensor channels, const ChannelStatistics& stats,
                           const PilotAssignment& pilots, const NetworkConfig& cfg,
                           std::uint64_t noise_seed);

/// Covariance of the MMSE estimate, tau_p p_k R_kl Psi_kl^-1 R_kl.
CMatrix estimate_covariance(const ChannelStatistics& stats, const std::vector<CMatrix>& psi, int k, int l,
                            const NetworkConfig& cfg);

}  // namespace cellfree
