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

#include "cellfree/estimation.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace cellfree {
namespace {

CMatrix hermitian_sqrt(const CMatrix& r) {
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (r + r.adjoint()));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

// CN(0, I) entries: real and imaginary parts each N(0, 1/2).
void fill_standard_complex(std::mt19937_64& rng, Eigen::Ref<CVector> out) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  for (Eigen::Index n = 0; n < out.size(); ++n) {
    const double re = normal(rng);
    out[n] = Complex(re, normal(rng));
  }
}

}  // namespace

PilotAssignment assign_pilots(const Matrix& beta, int tau_p) {
  if (tau_p < 1) throw std::invalid_argument("tau_p must be at least 1");
  const int num_ues = static_cast<int>(beta.rows());
  PilotAssignment out;
  out.pilot.assign(num_ues, 0);
  const int orthogonal = std::min(tau_p, num_ues);
  for (int k = 0; k < orthogonal; ++k) out.pilot[k] = k;

  for (int k = orthogonal; k < num_ues; ++k) {
    Eigen::Index master = 0;
    beta.row(k).maxCoeff(&master);  // first maximum on ties
    Vector interference = Vector::Zero(tau_p);
    for (int i = 0; i < k; ++i) interference[out.pilot[i]] += beta(i, master);
    Eigen::Index best = 0;
    interference.minCoeff(&best);
    out.pilot[k] = static_cast<int>(best);
  }
  return out;
}

ChannelTensor sample_channels(const ChannelStatistics& stats, int n_real, std::uint64_t seed) {
  const int K = stats.num_ues;
  const int L = stats.num_aps;
  const int N = stats.num_antennas;
  std::vector<CMatrix> roots;
  roots.reserve(stats.R.size());
  for (const auto& r : stats.R) roots.push_back(hermitian_sqrt(r));

  ChannelTensor h(n_real, K, L, N);
  std::mt19937_64 rng(derive_seed(seed, 0xC4A77E15));
  CVector z(N);
  for (int r = 0; r < n_real; ++r) {
    for (int k = 0; k < K; ++k) {
      for (int l = 0; l < L; ++l) {
        fill_standard_complex(rng, z);
        h.at(r, k, l) = roots[static_cast<std::size_t>(k) * L + l] * z;
      }
    }
  }
  return h;
}

std::vector<CMatrix> pilot_correlations(const ChannelStatistics& stats, const PilotAssignment& pilots,
                                        const NetworkConfig& cfg) {
  const int K = stats.num_ues;
  const int L = stats.num_aps;
  const int N = stats.num_antennas;
  const double gain = cfg.tau_p * cfg.p_ul;
  std::vector<CMatrix> psi(static_cast<std::size_t>(K) * L);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      CMatrix m = CMatrix::Identity(N, N) * cfg.noise_power;
      for (int i = 0; i < K; ++i) {
        if (pilots.pilot[i] == pilots.pilot[k]) m += gain * stats.corr(i, l);
      }
      psi[static_cast<std::size_t>(k) * L + l] = std::move(m);
    }
  }
  return psi;
}

CMatrix estimate_covariance(const ChannelStatistics& stats, const std::vector<CMatrix>& psi, int k, int l,
                            const NetworkConfig& cfg) {
  const CMatrix& r = stats.corr(k, l);
  const CMatrix& p = psi[static_cast<std::size_t>(k) * stats.num_aps + l];
  return cfg.tau_p * cfg.p_ul * r * p.llt().solve(r);
}

ChannelBatch mmse_estimate(ChannelTensor channels, const ChannelStatistics& stats,
                           const PilotAssignment& pilots, const NetworkConfig& cfg,
                           std::uint64_t noise_seed) {
  const int K = stats.num_ues;
  const int L = stats.num_aps;
  const int N = stats.num_antennas;
  const int n_real = channels.n_real();
  if (channels.num_ues() != K || channels.num_aps() != L || channels.num_antennas() != N ||
      static_cast<int>(pilots.pilot.size()) != K) {
    throw std::invalid_argument("mmse_estimate: inconsistent dimensions");
  }

  ChannelBatch batch;
  batch.psi = pilot_correlations(stats, pilots, cfg);

  // Estimation matrices sqrt(tau_p p) R Psi^-1 depend only on statistics.
  const double amp = std::sqrt(cfg.tau_p * cfg.p_ul);
  std::vector<CMatrix> estimator(static_cast<std::size_t>(K) * L);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const CMatrix& psi = batch.psi[static_cast<std::size_t>(k) * L + l];
      const Eigen::LLT<CMatrix> llt(psi);
      if (llt.info() != Eigen::Success) throw std::runtime_error("mmse_estimate: singular pilot correlation");
      // R Psi^-1 = (Psi^-1 R)^H since both are Hermitian.
      estimator[static_cast<std::size_t>(k) * L + l] = amp * llt.solve(stats.corr(k, l)).adjoint();
    }
  }

  int tau_p = 0;
  for (const int t : pilots.pilot) tau_p = std::max(tau_p, t + 1);

  batch.h_hat = ChannelTensor(n_real, K, L, N);
  std::mt19937_64 rng(derive_seed(noise_seed, 0x9015E));
  const double noise_amp = std::sqrt(cfg.noise_power);
  std::vector<CVector> received(static_cast<std::size_t>(tau_p) * L, CVector::Zero(N));
  for (int r = 0; r < n_real; ++r) {
    for (int t = 0; t < tau_p; ++t) {
      for (int l = 0; l < L; ++l) {
        CVector& y = received[static_cast<std::size_t>(t) * L + l];
        fill_standard_complex(rng, y);
        y *= noise_amp;
      }
    }
    for (int i = 0; i < K; ++i) {
      for (int l = 0; l < L; ++l) {
        received[static_cast<std::size_t>(pilots.pilot[i]) * L + l] += amp * channels.at(r, i, l);
      }
    }
    for (int k = 0; k < K; ++k) {
      for (int l = 0; l < L; ++l) {
        batch.h_hat.at(r, k, l) = estimator[static_cast<std::size_t>(k) * L + l] *
                                  received[static_cast<std::size_t>(pilots.pilot[k]) * L + l];
      }
    }
  }
  batch.h = std::move(channels);
  return batch;
}

}  // namespace cellfree
