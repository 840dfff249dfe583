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

#include "cellfree/precoding.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cellfree/binary_io.hpp"
#include "cellfree/parallel.hpp"

namespace cellfree {
namespace {

constexpr double kDegenerateNorm = 1e-30;
constexpr int kChunk = 64;
constexpr std::uint32_t kSeFormatVersion = 1;

struct Partial {
  CMatrix a_sum;            // K x L
  std::vector<Matrix> b_sum;  // K*K of L x L
};

Partial zero_partial(int K, int L) {
  return {CMatrix::Zero(K, L), std::vector<Matrix>(static_cast<std::size_t>(K) * K, Matrix::Zero(L, L))};
}

void add_into(Partial& dst, const Partial& src) {
  dst.a_sum += src.a_sum;
  for (std::size_t j = 0; j < dst.b_sum.size(); ++j) dst.b_sum[j] += src.b_sum[j];
}

// Pairwise tree reduction in index order so the sum is independent of worker count.
Partial reduce_pairwise(std::vector<Partial>& parts) {
  for (std::size_t stride = 1; stride < parts.size(); stride *= 2) {
    for (std::size_t i = 0; i + stride < parts.size(); i += 2 * stride) add_into(parts[i], parts[i + stride]);
  }
  return std::move(parts.front());
}

}  // namespace

Precoders compute_precoders(const ChannelBatch& batch, Precoder scheme, double p_ul, double sigma2) {
  const ChannelTensor& est = batch.h_hat;
  const int K = est.num_ues();
  const int L = est.num_aps();
  const int N = est.num_antennas();
  Precoders out{ChannelTensor(est.n_real(), K, L, N), 0};

  CMatrix reg(N, N);
  CVector raw(N);
  for (int r = 0; r < est.n_real(); ++r) {
    for (int l = 0; l < L; ++l) {
      Eigen::LDLT<CMatrix> solver;
      if (scheme == Precoder::kRZF) {
        reg = CMatrix::Identity(N, N) * sigma2;
        for (int i = 0; i < K; ++i) reg.noalias() += p_ul * est.at(r, i, l) * est.at(r, i, l).adjoint();
        solver.compute(reg);
      }
      for (int k = 0; k < K; ++k) {
        if (scheme == Precoder::kMR) {
          raw = est.at(r, k, l);
        } else {
          raw = solver.solve(p_ul * est.at(r, k, l));
        }
        const double norm = raw.norm();
        if (!(norm >= kDegenerateNorm)) {
          out.w.at(r, k, l).setZero();
          ++out.degenerate;
        } else {
          out.w.at(r, k, l) = raw / norm;
        }
      }
    }
  }
  return out;
}

SEParameters estimate_se_parameters(const ChannelBatch& batch, const Precoders& precoders,
                                    const NetworkConfig& cfg) {
  const ChannelTensor& h = batch.h;
  const ChannelTensor& w = precoders.w;
  const int K = h.num_ues();
  const int L = h.num_aps();
  const int n_real = h.n_real();
  if (static_cast<std::size_t>(n_real) < kMinRealizations) {
    throw std::invalid_argument("estimate_se_parameters needs at least 100 realizations");
  }
  if (w.n_real() != n_real || w.num_ues() != K || w.num_aps() != L) {
    throw std::invalid_argument("estimate_se_parameters: precoders do not match the batch");
  }

  const std::size_t n_chunks = (static_cast<std::size_t>(n_real) + kChunk - 1) / kChunk;
  std::vector<Partial> parts(n_chunks);
  parallel_for(n_chunks, [&](std::size_t c) {
    Partial p = zero_partial(K, L);
    CMatrix g(L, K);  // g(l, i) = h_kl^H w_il for the current k
    Vector gr(L);
    Vector gi(L);
    const int end = std::min<int>(n_real, static_cast<int>((c + 1) * kChunk));
    for (int r = static_cast<int>(c * kChunk); r < end; ++r) {
      for (int k = 0; k < K; ++k) {
        for (int i = 0; i < K; ++i) {
          for (int l = 0; l < L; ++l) g(l, i) = h.at(r, k, l).dot(w.at(r, i, l));
        }
        p.a_sum.row(k) += g.col(k).transpose();
        for (int i = 0; i < K; ++i) {
          gr = g.col(i).real();
          gi = g.col(i).imag();
          Matrix& b = p.b_sum[static_cast<std::size_t>(k) * K + i];
          b.noalias() += gr * gr.transpose();
          b.noalias() += gi * gi.transpose();
        }
      }
    }
    parts[c] = std::move(p);
  });
  Partial total = reduce_pairwise(parts);

  SEParameters out;
  out.num_ues = K;
  out.num_aps = L;
  out.sigma2 = cfg.noise_power;
  out.prelog = cfg.prelog();
  out.n_real = static_cast<std::uint64_t>(n_real);
  out.a.resize(K, L);
  const double inv = 1.0 / n_real;
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const Complex mean = total.a_sum(k, l) * inv;
      out.a(k, l) = std::abs(mean);
      if (out.a(k, l) > 0.0) {
        const double residue = std::abs(mean.imag()) / out.a(k, l);
        out.max_imag_residue = std::max(out.max_imag_residue, residue);
        if (residue > kImagResidueWarn) ++out.residue_warnings;
      }
    }
  }
  out.B.resize(static_cast<std::size_t>(K) * K);
  for (std::size_t j = 0; j < out.B.size(); ++j) out.B[j] = total.b_sum[j] * inv;
  return out;
}

double max_budget_violation(const PowerAllocation& alloc, double p_max) {
  const Vector per_ap = alloc.mu.cwiseAbs2().colwise().sum().transpose();
  return per_ap.size() == 0 ? -1.0 : (per_ap.maxCoeff() - p_max) / p_max;
}

bool is_feasible(const PowerAllocation& alloc, double p_max, double rel_tol) {
  return alloc.mu.allFinite() && max_budget_violation(alloc, p_max) <= rel_tol;
}

Vector compute_sinr(const SEParameters& params, const Matrix& mu) {
  const int K = params.num_ues;
  Vector sinr(K);
  for (int k = 0; k < K; ++k) {
    const double signal = params.a.row(k).dot(mu.row(k));
    const double s2 = signal * signal;
    double total = 0.0;
    for (int i = 0; i < K; ++i) total += mu.row(i) * params.b(k, i) * mu.row(i).transpose();
    const double denom = total - s2 + params.sigma2;
    if (denom < params.sigma2 * (1.0 - 1e-9)) {
      std::ostringstream os;
      os << "SINR denominator below noise floor for UE " << k << " (" << denom << " < " << params.sigma2 << ")";
      throw std::runtime_error(os.str());
    }
    sinr[k] = s2 / denom;
  }
  return sinr;
}

Vector compute_se(const SEParameters& params, const PowerAllocation& alloc, double p_max) {
  if (alloc.mu.rows() != params.num_ues || alloc.mu.cols() != params.num_aps) {
    throw std::invalid_argument("compute_se: allocation shape does not match parameters");
  }
  if (!is_feasible(alloc, p_max)) throw std::invalid_argument("compute_se: allocation violates per-AP budget");
  if ((alloc.mu.array() < 0.0).any()) throw std::invalid_argument("compute_se: negative square-root power");
  const Vector sinr = compute_sinr(params, alloc.mu);
  return params.prelog * sinr.unaryExpr([](double s) { return std::log2(1.0 + s); });
}

void write_se_parameters(std::ostream& out, const SEParameters& params) {
  io::Writer w(out);
  w.magic("CFSE");
  w.u32(kSeFormatVersion);
  w.u32(static_cast<std::uint32_t>(params.num_ues));
  w.u32(static_cast<std::uint32_t>(params.num_aps));
  w.f64(params.prelog);
  w.f64(params.sigma2);
  w.u64(params.n_real);
  w.matrix(params.a);
  for (const auto& b : params.B) w.matrix(b);
}

SEParameters read_se_parameters(std::istream& in) {
  io::Reader r(in);
  r.expect_magic("CFSE");
  if (const auto v = r.u32(); v != kSeFormatVersion) {
    throw DataError("unsupported SE parameter format version " + std::to_string(v));
  }
  SEParameters p;
  p.num_ues = static_cast<int>(r.u32());
  p.num_aps = static_cast<int>(r.u32());
  if (p.num_ues < 1 || p.num_aps < 1 || p.num_ues > 4096 || p.num_aps > 4096) {
    throw DataError("SE parameter dimensions out of range");
  }
  p.prelog = r.f64();
  p.sigma2 = r.f64();
  p.n_real = r.u64();
  p.a = r.matrix(p.num_ues, p.num_aps);
  p.B.reserve(static_cast<std::size_t>(p.num_ues) * p.num_ues);
  for (int j = 0; j < p.num_ues * p.num_ues; ++j) p.B.push_back(r.matrix(p.num_aps, p.num_aps));
  return p;
}

std::uint64_t digest(const SEParameters& params) {
  std::ostringstream os;
  write_se_parameters(os, params);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const unsigned char c : os.str()) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace cellfree
