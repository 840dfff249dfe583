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

#include <random>
#include <sstream>

#include "cellfree/heuristic.hpp"
#include "cellfree/wmmse.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cellfree;

namespace {

SEParameters drop_params(const NetworkConfig& cfg, Precoder scheme, std::uint64_t seed, int n_real = 200) {
  return simulate_drop(cfg, scheme, seed, n_real).params;
}

QuadraticSubproblem random_psd_problem(int K, int L, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  QuadraticSubproblem p;
  p.budget = 1.0;
  p.q.resize(K, L);
  for (int i = 0; i < K; ++i) {
    Matrix m(L, L);
    for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = g(rng);
    p.C.push_back(m * m.transpose() + 0.05 * Matrix::Identity(L, L));
    for (int l = 0; l < L; ++l) p.q(i, l) = 3.0 * u(rng);
  }
  return p;
}

}  // namespace

TEST_CASE("auxiliary variables") {
  SEParameters p;
  p.num_ues = 1;
  p.num_aps = 1;
  p.a = Matrix::Constant(1, 1, 1.0);
  p.B = {Matrix::Constant(1, 1, 1.0)};
  p.sigma2 = 1.0;

  const Auxiliaries zero = update_auxiliaries(p, Matrix::Zero(1, 1), Objective::kSumSE);
  CHECK(zero.v[0] == 0.0);
  CHECK(zero.e[0] == 1.0);
  CHECK(zero.omega[0] == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(zero.clamp_events == 1);

  const Auxiliaries half = update_auxiliaries(p, Matrix::Constant(1, 1, 1.0), Objective::kSumSE);
  CHECK(half.e[0] == doctest::Approx(0.5));
  CHECK(half.omega[0] == doctest::Approx(2.0));
  const Auxiliaries pf = update_auxiliaries(p, Matrix::Constant(1, 1, 1.0), Objective::kProportionalFairness);
  CHECK(pf.omega[0] == doctest::Approx(-1.0 / (0.5 * std::log(0.5))).epsilon(1e-14));
  CHECK(pf.omega[0] == doctest::Approx(2.8854).epsilon(1e-4));
}

TEST_CASE("MSE identity and receiver scale covariance") {
  const SEParameters p = normalized(drop_params(support::desk_network(), Precoder::kMR, 3), 1.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int t = 0; t < 50; ++t) {
    Matrix mu(6, 4);
    for (Eigen::Index j = 0; j < mu.size(); ++j) mu.data()[j] = u(rng);
    project_per_ap(mu, 1.0);
    const Auxiliaries aux = update_auxiliaries(p, mu, Objective::kSumSE);
    const double t_scale = 0.37;
    const Auxiliaries scaled = update_auxiliaries(p, t_scale * mu, Objective::kSumSE);
    for (int k = 0; k < 6; ++k) {
      REQUIRE(aux.e[k] == doctest::Approx(1.0 - p.a.row(k).dot(mu.row(k)) * aux.v[k]).epsilon(1e-12));
      // v(t mu) = t s / (t^2 I + sigma^2) with s, I the signal and interference terms at mu.
      const double s = p.a.row(k).dot(mu.row(k));
      const double d = s / aux.v[k] - p.sigma2;
      REQUIRE(scaled.v[k] == doctest::Approx(t_scale * s / (t_scale * t_scale * d + p.sigma2)).epsilon(1e-12));
    }
  }
}

TEST_CASE("subproblem with slack budgets is unconstrained") {
  std::mt19937_64 rng(2);
  QuadraticSubproblem p = random_psd_problem(3, 2, rng);
  for (auto& c : p.C) {
    const Matrix d = c.diagonal().asDiagonal();
    c = d;
  }
  p.budget = 1e8;
  SubproblemConfig cfg;
  cfg.eps_inner = 1e-10;
  cfg.max_iters = 200000;
  const SubproblemResult r = solve_quadratic(p, cfg);
  for (int i = 0; i < 3; ++i) {
    const Vector expect = p.C[i].ldlt().solve(p.q.row(i).transpose());
    for (int l = 0; l < 2; ++l) CHECK(r.mu(i, l) == doctest::Approx(expect[l]).epsilon(1e-5));
  }
}

TEST_CASE("single UE with isotropic curvature projects radially") {
  QuadraticSubproblem p;
  p.budget = 0.25;
  const double c = 2.0;
  p.C = {Matrix::Identity(3, 3) * c};
  p.q = Matrix(1, 3);
  p.q << 3.0, 0.2, 0.1;
  const SubproblemResult r = solve_quadratic(p, SubproblemConfig{});
  // Each column holds one entry, so the ball per AP is the interval [-0.5, 0.5].
  const Vector free = p.q.row(0).transpose() / c;
  for (int l = 0; l < 3; ++l) CHECK(r.mu(0, l) == doctest::Approx(std::min(free[l], 0.5)).epsilon(1e-6));
}

TEST_CASE("ADMM and accelerated gradient agree with a long projected-gradient run") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const QuadraticSubproblem p = random_psd_problem(3, 2, rng);
    const double ref = oracle::projected_gradient_objective(p, 200000, true);
    SubproblemConfig admm;
    const SubproblemResult a = solve_quadratic(p, admm);
    SubproblemConfig pg;
    pg.method = SubproblemMethod::kProjectedGradient;
    const SubproblemResult b = solve_quadratic(p, pg);
    REQUIRE(a.converged);
    CHECK(std::abs(a.objective - ref) <= 1e-6);
    CHECK(std::abs(b.objective - ref) <= 1e-6);
    support::require_feasible(a.mu, p.budget);

    SubproblemConfig signed_admm;
    signed_admm.nonnegative = false;
    const SubproblemResult s = solve_quadratic(p, signed_admm);
    CHECK(std::abs(s.objective - oracle::projected_gradient_objective(p, 200000, false)) <= 1e-6);
  }
}

TEST_CASE("build_subproblem is symmetric PSD") {
  const SEParameters p = normalized(drop_params(support::desk_network(), Precoder::kRZF, 7), 1.0);
  const Matrix mu = Matrix::Constant(6, 4, std::sqrt(1.0 / 6.0));
  const Auxiliaries aux = update_auxiliaries(p, mu, Objective::kSumSE);
  const QuadraticSubproblem q = build_subproblem(p, aux.omega, aux.v, 1.0);
  for (const auto& c : q.C) {
    CHECK((c - c.transpose()).norm() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(c).eigenvalues().minCoeff() >= 0.0);
  }
  SEParameters bad = p;
  for (int k = 0; k < 6; ++k) bad.b(k, 0) = -1e3 * Matrix::Identity(4, 4);
  CHECK_THROWS_AS(build_subproblem(bad, aux.omega, aux.v, 1.0), std::runtime_error);
}

TEST_CASE("WMMSE traces are monotone and allocations feasible") {
  const NetworkConfig cfg = support::desk_network();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const Precoder scheme : {Precoder::kMR, Precoder::kRZF}) {
      const SEParameters p = drop_params(cfg, scheme, 100 + seed);
      for (const Objective obj : {Objective::kSumSE, Objective::kProportionalFairness}) {
        SolverConfig sc;
        sc.objective = obj;
        const WmmseResult r = wmmse_solve(p, sc, cfg.p_max_dl);
        REQUIRE(trace_is_monotone(r.trace, sc.subproblem.eps_inner));
        support::require_feasible(r.alloc.mu, cfg.p_max_dl);
        REQUIRE(r.trace.back() == doctest::Approx(utility(p, r.alloc.mu, obj)).epsilon(1e-9));
        REQUIRE(r.trace.back() >= r.trace.front());
      }
    }
  }
}

TEST_CASE("WMMSE on one AP and two UEs matches grid search") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int t = 0; t < 10; ++t) {
    SEParameters p;
    p.num_ues = 2;
    p.num_aps = 1;
    p.sigma2 = 1.0;
    p.a = Matrix(2, 1);
    p.a << u(rng), u(rng);
    p.B.resize(4);
    for (int k = 0; k < 2; ++k) {
      p.b(k, k) = Matrix::Constant(1, 1, p.a(k, 0) * p.a(k, 0) * (1.0 + 0.3 * u(rng)));
      p.b(k, 1 - k) = Matrix::Constant(1, 1, 0.5 * u(rng));
    }
    p.a *= 3.0;
    for (auto& b : p.B) b *= 9.0;
    SolverConfig sc;
    sc.eps_outer = 1e-14;
    const WmmseResult r = wmmse_solve(p, sc, 1.0);
    const double best = oracle::grid_search_sum_se(p, 1.0, 400);
    CHECK(std::abs(r.trace.back() - best) <= 1e-3);
  }
}

TEST_CASE("converged WMMSE is a fixed point and stationary") {
  const NetworkConfig cfg = support::small_network(2, 3, 2, 3);
  const SEParameters raw = drop_params(cfg, Precoder::kMR, 17, 500);
  const SEParameters p = normalized(raw, cfg.p_max_dl);
  SolverConfig sc;
  sc.eps_outer = 1e-16;
  sc.max_outer_iters = 5000;
  sc.subproblem.eps_inner = 1e-10;
  sc.subproblem.max_iters = 200000;
  const WmmseResult r = wmmse_solve(p, sc, 1.0);
  const Matrix mu = r.alloc.mu;

  const Auxiliaries aux = update_auxiliaries(p, mu, Objective::kSumSE);
  const SubproblemResult again = solve_subproblem(p, aux.omega, aux.v, 1.0, sc.subproblem, mu);
  CHECK(std::abs(utility(p, again.mu, Objective::kSumSE) - r.trace.back()) < 1e-4);

  // Projected gradient of the utility over the per-AP balls, from central differences.
  const auto f = [&](const Vector& x) {
    return utility(p, Eigen::Map<const Matrix>(x.data(), mu.rows(), mu.cols()), Objective::kSumSE);
  };
  const Vector x = Eigen::Map<const Vector>(mu.data(), mu.size());
  const Vector grad = oracle::central_gradient(f, x, 1e-5);
  const Vector step = x + 1e-3 * grad;
  Matrix moved = Eigen::Map<const Matrix>(step.data(), mu.rows(), mu.cols());
  project_feasible(moved, 1.0, true);
  const double pg_norm = (moved - mu).norm() / 1e-3;
  CHECK(pg_norm < 1e-3);
}

TEST_CASE("PF protects the weakest UE") {
  const NetworkConfig cfg = support::desk_network();
  int wins = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const SEParameters p = drop_params(cfg, Precoder::kMR, 1000 + t);
    SolverConfig sum;
    SolverConfig pf;
    pf.objective = Objective::kProportionalFairness;
    const Vector se_sum = compute_se(p, wmmse_solve(p, sum, 1.0).alloc, 1.0);
    const Vector se_pf = compute_se(p, wmmse_solve(p, pf, 1.0).alloc, 1.0);
    if (se_pf.minCoeff() >= se_sum.minCoeff()) ++wins;
  }
  CHECK(wins >= 0.8 * trials);
}

TEST_CASE("solver input checks") {
  const SEParameters p = drop_params(support::desk_network(), Precoder::kMR, 9);
  SolverConfig sc;
  sc.init = InitPolicy::kFractionalHeuristic;
  CHECK_THROWS_AS(wmmse_solve(p, sc, 1.0), std::invalid_argument);
  sc.init = InitPolicy::kEqualPower;
  sc.objective = Objective::kProportionalFairness;
  Matrix init = Matrix::Constant(6, 4, 0.2);
  init.row(3).setZero();
  CHECK_THROWS_AS(wmmse_solve(p, sc, 1.0, init), std::invalid_argument);
  sc.eps_outer = 0.0;
  CHECK_THROWS_AS(wmmse_solve(p, sc, 1.0), std::invalid_argument);
}

TEST_CASE("trace CSV") {
  const SEParameters p = drop_params(support::desk_network(), Precoder::kMR, 9);
  const WmmseResult r = wmmse_solve(p, SolverConfig{}, 1.0);
  std::ostringstream os;
  write_trace_csv(os, r);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "iter,utility,max_constraint_violation");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == static_cast<int>(r.trace.size()));
  for (const double v : r.max_violation) CHECK(v <= 1e-9);
}
