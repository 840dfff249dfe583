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

#include <doctest.h>

#include "cellfree/estimation.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cellfree;

namespace {

ChannelStatistics iid_statistics(const Matrix& beta, int N) {
  ChannelStatistics st;
  st.num_ues = static_cast<int>(beta.rows());
  st.num_aps = static_cast<int>(beta.cols());
  st.num_antennas = N;
  st.beta = beta;
  for (int k = 0; k < st.num_ues; ++k) {
    for (int l = 0; l < st.num_aps; ++l) st.R.push_back(CMatrix::Identity(N, N) * beta(k, l));
  }
  return st;
}

NetworkConfig unit_noise(int L, int K, int N, int tau_p, double p_ul) {
  NetworkConfig cfg = support::small_network(L, K, N, tau_p);
  cfg.noise_power = 1.0;
  cfg.p_ul = p_ul;
  return cfg;
}

double relative_frobenius(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("orthogonal pilots when tau_p = K") {
  Matrix beta = Matrix::Random(5, 3).cwiseAbs();
  const PilotAssignment p = assign_pilots(beta, 5);
  for (int k = 0; k < 5; ++k) CHECK(p.pilot[k] == k);
}

TEST_CASE("greedy pilot choice at the master AP") {
  Matrix beta(3, 2);
  beta << 0.9, 0.01, 0.1, 0.02, 0.5, 0.03;
  const PilotAssignment p = assign_pilots(beta, 2);
  CHECK(p.pilot == std::vector<int>{0, 1, 1});

  // Ties on accumulated LSF go to the lower pilot index.
  Matrix tie(3, 1);
  tie << 0.4, 0.4, 0.7;
  CHECK(assign_pilots(tie, 2).pilot == std::vector<int>{0, 1, 0});

  // Co-located UEs never share while a pilot is still unused.
  Matrix twins(3, 2);
  twins << 0.3, 0.2, 0.3, 0.2, 0.1, 0.9;
  const auto t = assign_pilots(twins, 3).pilot;
  CHECK(t[0] != t[1]);
}

TEST_CASE("channel sampling") {
  Matrix beta(2, 1);
  beta << 0.0, 0.25;
  const ChannelStatistics st = iid_statistics(beta, 2);
  const ChannelTensor h = sample_channels(st, 100000, 4);
  double zero = 0.0;
  for (int r = 0; r < h.n_real(); ++r) zero = std::max(zero, h.at(r, 0, 0).norm());
  CHECK(zero == 0.0);
  CHECK(relative_frobenius(oracle::sample_covariance(h, 1, 0), st.corr(1, 0)) < 0.05);

  const ChannelTensor again = sample_channels(st, 100, 4);
  for (int r = 0; r < 100; ++r) REQUIRE(again.at(r, 1, 0) == h.at(r, 1, 0));

  NetworkConfig cfg;
  cfg.correlation = CorrelationModel::kLocalScattering;
  const ChannelStatistics ls = build_statistics(cfg, drop_scenario(cfg, 2));
  const ChannelTensor hl = sample_channels(ls, 100000, 8);
  CHECK(relative_frobenius(oracle::sample_covariance(hl, 3, 5), ls.corr(3, 5)) < 0.05);
}

TEST_CASE("scalar MMSE estimate without contamination") {
  Matrix beta(1, 1);
  beta << 0.8;
  const ChannelStatistics st = iid_statistics(beta, 1);
  const NetworkConfig cfg = unit_noise(1, 1, 1, 1, 2.0);
  const ChannelBatch b = mmse_estimate(sample_channels(st, 200000, 1), st, assign_pilots(beta, 1), cfg, 2);
  const double tp = cfg.tau_p * cfg.p_ul;
  const double gain = std::sqrt(tp) * 0.8 / (tp * 0.8 + 1.0);
  CHECK(b.psi_at(0, 0)(0, 0).real() == doctest::Approx(tp * 0.8 + 1.0));
  // E{h_hat conj(h)} = gain * sqrt(tp) * beta
  Complex cross{};
  for (int r = 0; r < b.n_real(); ++r) cross += b.h_hat.at(r, 0, 0)[0] * std::conj(b.h.at(r, 0, 0)[0]);
  cross /= static_cast<double>(b.n_real());
  CHECK(cross.real() == doctest::Approx(gain * std::sqrt(tp) * 0.8).epsilon(0.02));
  CHECK(std::abs(cross.imag()) < 0.01);
  const CMatrix cov = estimate_covariance(st, b.psi, 0, 0, cfg);
  CHECK(cov(0, 0).real() == doctest::Approx(tp * 0.64 / (tp * 0.8 + 1.0)).epsilon(1e-12));
}

TEST_CASE("estimate covariance and orthogonality with contamination") {
  Matrix beta(3, 2);
  beta << 1.0, 0.3, 0.5, 0.9, 0.2, 0.4;
  const ChannelStatistics st = iid_statistics(beta, 2);
  const NetworkConfig cfg = unit_noise(2, 3, 2, 2, 1.0);
  const PilotAssignment pilots = assign_pilots(beta, 2);
  const ChannelBatch b = mmse_estimate(sample_channels(st, 100000, 3), st, pilots, cfg, 4);
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 2; ++l) {
      const CMatrix expect = estimate_covariance(st, b.psi, k, l, cfg);
      REQUIRE(relative_frobenius(oracle::sample_covariance(b.h_hat, k, l), expect) < 0.05);
      CMatrix cross = CMatrix::Zero(2, 2);
      for (int r = 0; r < b.n_real(); ++r) {
        cross += b.h_hat.at(r, k, l) * (b.h.at(r, k, l) - b.h_hat.at(r, k, l)).adjoint();
      }
      cross /= static_cast<double>(b.n_real());
      REQUIRE(cross.norm() <= 0.05 * st.corr(k, l).norm());
    }
  }
}

TEST_CASE("pilot-sharing UEs with equal statistics have collinear estimates") {
  Matrix beta(2, 1);
  beta << 0.6, 0.6;
  const ChannelStatistics st = iid_statistics(beta, 3);
  const NetworkConfig cfg = unit_noise(1, 2, 3, 1, 1.0);
  const ChannelBatch b = mmse_estimate(sample_channels(st, 200, 5), st, assign_pilots(beta, 1), cfg, 6);
  for (int r = 0; r < b.n_real(); ++r) {
    const CVector x = b.h_hat.at(r, 0, 0);
    const CVector y = b.h_hat.at(r, 1, 0);
    REQUIRE(std::abs(x.dot(y)) == doctest::Approx(x.norm() * y.norm()).epsilon(1e-12));
  }
}

TEST_CASE("high pilot power recovers the channel") {
  Matrix beta(2, 2);
  beta << 1.0, 0.5, 0.3, 0.7;
  const ChannelStatistics st = iid_statistics(beta, 2);
  const NetworkConfig cfg = unit_noise(2, 2, 2, 2, 1e6);
  const ChannelBatch b = mmse_estimate(sample_channels(st, 2000, 7), st, assign_pilots(beta, 2), cfg, 8);
  double err = 0.0;
  double energy = 0.0;
  for (int r = 0; r < b.n_real(); ++r) {
    for (int k = 0; k < 2; ++k) {
      for (int l = 0; l < 2; ++l) {
        err += (b.h_hat.at(r, k, l) - b.h.at(r, k, l)).squaredNorm();
        energy += b.h.at(r, k, l).squaredNorm();
      }
    }
  }
  CHECK(err / energy < 1e-5);
}

TEST_CASE("estimation is seeded") {
  const NetworkConfig cfg = support::desk_network();
  const ChannelStatistics st = build_statistics(cfg, drop_scenario(cfg, 1));
  const auto pilots = assign_pilots(st.beta, cfg.tau_p);
  const ChannelBatch a = mmse_estimate(sample_channels(st, 100, 1), st, pilots, cfg, 2);
  const ChannelBatch b = mmse_estimate(sample_channels(st, 100, 1), st, pilots, cfg, 2);
  const ChannelBatch c = mmse_estimate(sample_channels(st, 100, 1), st, pilots, cfg, 3);
  CHECK(a.h_hat.at(10, 2, 1) == b.h_hat.at(10, 2, 1));
  CHECK(a.h_hat.at(10, 2, 1) != c.h_hat.at(10, 2, 1));
  CHECK(a.h.at(10, 2, 1) == c.h.at(10, 2, 1));
}
