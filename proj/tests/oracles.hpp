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

// Reference computations for tests, written directly from the definitions.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "cellfree/estimation.hpp"
#include "cellfree/network.hpp"
#include "cellfree/pipeline.hpp"
#include "cellfree/precoding.hpp"
#include "cellfree/wmmse.hpp"

namespace oracle {

using cellfree::CMatrix;
using cellfree::Complex;
using cellfree::Matrix;
using cellfree::Vector;

// Minimum over the 9 translated copies of q, floored at 1 m.
inline double torus_distance(cellfree::Point p, cellfree::Point q, double area) {
  double best = std::numeric_limits<double>::infinity();
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      const double x = q.x + dx * area - p.x;
      const double y = q.y + dy * area - p.y;
      best = std::min(best, std::sqrt(x * x + y * y));
    }
  }
  return std::max(best, 1.0);
}

// Pathloss in dB evaluated in long double.
inline long double pathloss_db(long double d) { return -30.5L - 36.7L * std::log10(d); }

// Mean of |x| for x ~ CN(0, c).
inline double rayleigh_mean(double c) { return std::sqrt(std::numbers::pi * c / 4.0); }

inline Complex inner(const cellfree::ChannelTensor& h, const cellfree::ChannelTensor& w, int r, int k, int i, int l) {
  Complex s{};
  for (int n = 0; n < h.num_antennas(); ++n) s += std::conj(h.at(r, k, l)[n]) * w.at(r, i, l)[n];
  return s;
}

// b_ki^{lm} = Re mean(h_kl^H w_il conj(h_km^H w_im)), one entry at a time.
inline Matrix naive_b(const cellfree::ChannelTensor& h, const cellfree::ChannelTensor& w, int k, int i) {
  const int L = h.num_aps();
  Matrix b = Matrix::Zero(L, L);
  for (int l = 0; l < L; ++l) {
    for (int m = 0; m < L; ++m) {
      double acc = 0.0;
      for (int r = 0; r < h.n_real(); ++r) acc += (inner(h, w, r, k, i, l) * std::conj(inner(h, w, r, k, i, m))).real();
      b(l, m) = acc / h.n_real();
    }
  }
  return b;
}

// Hardening-bound SE straight from channel and precoder draws: the effective gain of UE k towards
// the stream of UE i is g_ki = sum_l mu_il h_kl^H w_il; SINR_k = |E g_kk|^2 / (sum_i E|g_ki|^2 - |E g_kk|^2 + sigma2).
inline Vector monte_carlo_se(const cellfree::ChannelTensor& h, const cellfree::ChannelTensor& w, const Matrix& mu,
                             double sigma2, double prelog) {
  const int K = h.num_ues();
  const int L = h.num_aps();
  const int R = h.n_real();
  Vector se(K);
  for (int k = 0; k < K; ++k) {
    Complex signal{};
    double power = 0.0;
    for (int r = 0; r < R; ++r) {
      for (int i = 0; i < K; ++i) {
        Complex g{};
        for (int l = 0; l < L; ++l) g += mu(i, l) * inner(h, w, r, k, i, l);
        power += std::norm(g) / R;
        if (i == k) signal += g / static_cast<double>(R);
      }
    }
    const double s2 = std::norm(signal);
    se[k] = prelog * std::log2(1.0 + s2 / (power - s2 + sigma2));
  }
  return se;
}

// Plain (unaccelerated) projected gradient run for a fixed, large number of steps.
inline double projected_gradient_objective(const cellfree::QuadraticSubproblem& p, int iterations, bool nonnegative,
                                           Matrix* argmin = nullptr) {
  const auto K = p.q.rows();
  const auto L = p.q.cols();
  double lip = 0.0;
  for (const auto& c : p.C) lip = std::max(lip, 2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(c).eigenvalues().maxCoeff());
  const double step = 1.0 / std::max(lip, 1e-12);
  Matrix x = Matrix::Zero(K, L);
  const double radius = std::sqrt(p.budget);
  for (int it = 0; it < iterations; ++it) {
    for (Eigen::Index i = 0; i < K; ++i) {
      const Vector grad = 2.0 * (p.C[i] * x.row(i).transpose() - p.q.row(i).transpose());
      x.row(i) -= step * grad.transpose();
    }
    if (nonnegative) x = x.cwiseMax(0.0);
    for (Eigen::Index l = 0; l < L; ++l) {
      const double n = x.col(l).norm();
      if (n > radius) x.col(l) *= radius / n;
    }
  }
  if (argmin) *argmin = x;
  return p.objective(x);
}

// Exhaustive search of sum_k log2(1 + SINR_k) for L = 1, K = 2 over the quarter disc mu >= 0,
// mu_1^2 + mu_2^2 <= P, on a polar grid that includes the boundary.
inline double grid_search_sum_se(const cellfree::SEParameters& p, double budget, int steps, Matrix* best_mu = nullptr) {
  double best = -std::numeric_limits<double>::infinity();
  const double r_max = std::sqrt(budget);
  for (int a = 0; a <= steps; ++a) {
    const double theta = 0.5 * std::numbers::pi * a / steps;
    for (int b = 0; b <= steps; ++b) {
      const double r = r_max * b / steps;
      Matrix mu(2, 1);
      mu << r * std::cos(theta), r * std::sin(theta);
      double u = 0.0;
      for (int k = 0; k < 2; ++k) {
        const double s = p.a(k, 0) * mu(k, 0);
        double d = p.sigma2;
        for (int i = 0; i < 2; ++i) d += mu(i, 0) * p.b(k, i)(0, 0) * mu(i, 0);
        u += std::log2(1.0 + s * s / (d - s * s));
      }
      if (u > best) {
        best = u;
        if (best_mu) *best_mu = mu;
      }
    }
  }
  return best;
}

// Central differences of f at x, entry by entry.
inline Vector central_gradient(const std::function<double(const Vector&)>& f, Vector x, double h) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double keep = x[j];
    x[j] = keep + h;
    const double up = f(x);
    x[j] = keep - h;
    const double down = f(x);
    x[j] = keep;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

// Elementwise sample covariance E{x x^H} of one (k, l) slot.
inline CMatrix sample_covariance(const cellfree::ChannelTensor& t, int k, int l) {
  const int N = t.num_antennas();
  CMatrix c = CMatrix::Zero(N, N);
  for (int r = 0; r < t.n_real(); ++r) {
    for (int a = 0; a < N; ++a) {
      for (int b = 0; b < N; ++b) c(a, b) += t.at(r, k, l)[a] * std::conj(t.at(r, k, l)[b]);
    }
  }
  return c / static_cast<double>(t.n_real());
}

}  // namespace oracle
