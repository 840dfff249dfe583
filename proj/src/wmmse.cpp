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

#include "cellfree/wmmse.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace cellfree {
namespace {

constexpr double kPsdFloor = 1e-8;

double largest_eigenvalue(const Matrix& c) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

SubproblemResult finish(const QuadraticSubproblem& problem, Matrix mu, int iterations, bool converged) {
  SubproblemResult out;
  out.objective = problem.objective(mu);
  out.mu = mu.cwiseAbs();
  out.iterations = iterations;
  out.converged = converged;
  return out;
}

SubproblemResult solve_admm(const QuadraticSubproblem& problem, const SubproblemConfig& cfg, Matrix z) {
  const auto K = static_cast<int>(problem.q.rows());
  const auto L = static_cast<int>(problem.q.cols());

  double mean_diag = 0.0;
  for (const auto& c : problem.C) mean_diag += c.trace();
  mean_diag /= static_cast<double>(K) * L;
  const double rho = cfg.rho * std::max(mean_diag, 1e-12);

  // One factorization of (C_i + rho I) per UE for the whole subproblem.
  std::vector<Eigen::LLT<Matrix>> factors;
  factors.reserve(K);
  for (const auto& c : problem.C) factors.emplace_back(c + rho * Matrix::Identity(L, L));

  Matrix mu = z;
  Matrix u = Matrix::Zero(K, L);
  Matrix z_prev = z;
  Matrix best = z;
  double best_obj = problem.objective(z);
  const double scale = std::sqrt(problem.budget);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    for (int i = 0; i < K; ++i) {
      const Vector rhs = problem.q.row(i).transpose() + rho * (z.row(i) - u.row(i)).transpose();
      mu.row(i) = factors[i].solve(rhs).transpose();
    }
    z_prev = z;
    z = mu + u;
    project_feasible(z, problem.budget, cfg.nonnegative);
    u += mu - z;

    const double primal = (mu - z).cwiseAbs().maxCoeff() / scale;
    const double dual = (z - z_prev).cwiseAbs().maxCoeff() / scale;
    if (primal <= cfg.eps_inner && dual <= cfg.eps_inner) return finish(problem, z, it, true);
    if (it % 64 == 0) {
      const double obj = problem.objective(z);
      if (obj < best_obj) {
        best_obj = obj;
        best = z;
      }
    }
  }
  if (problem.objective(z) <= best_obj) best = z;
  return finish(problem, best, cfg.max_iters, false);
}

// Accelerated projected gradient with a fixed 1/Lipschitz step.
SubproblemResult solve_projected_gradient(const QuadraticSubproblem& problem, const SubproblemConfig& cfg,
                                          Matrix x) {
  const auto K = static_cast<int>(problem.q.rows());
  double lipschitz = 0.0;
  for (const auto& c : problem.C) lipschitz = std::max(lipschitz, 2.0 * largest_eigenvalue(c));
  if (lipschitz <= 0.0) lipschitz = 1.0;
  const double step = 1.0 / lipschitz;
  const double scale = std::sqrt(problem.budget);

  Matrix y = x;
  Matrix x_prev = x;
  Matrix grad(x.rows(), x.cols());
  double t = 1.0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    for (int i = 0; i < K; ++i) {
      grad.row(i) = 2.0 * (problem.C[i] * y.row(i).transpose() - problem.q.row(i).transpose()).transpose();
    }
    x_prev = x;
    x = y - step * grad;
    project_feasible(x, problem.budget, cfg.nonnegative);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
    if ((x - x_prev).cwiseAbs().maxCoeff() / scale <= cfg.eps_inner * 1e-2) return finish(problem, x, it, true);
  }
  return finish(problem, x, cfg.max_iters, false);
}

}  // namespace

void SolverConfig::validate() const {
  if (!(eps_outer > 0.0) || !(subproblem.eps_inner > 0.0) || !(subproblem.rho > 0.0)) {
    throw std::invalid_argument("solver tolerances and rho must be positive");
  }
  if (max_outer_iters < 1 || subproblem.max_iters < 1) throw std::invalid_argument("iteration limits must be >= 1");
}

Auxiliaries update_auxiliaries(const SEParameters& params, const Matrix& mu, Objective objective) {
  const int K = params.num_ues;
  Auxiliaries aux{Vector(K), Vector(K), Vector(K), 0};
  for (int k = 0; k < K; ++k) {
    const double signal = params.a.row(k).dot(mu.row(k));
    double total = params.sigma2;
    for (int i = 0; i < K; ++i) total += mu.row(i) * params.b(k, i) * mu.row(i).transpose();
    aux.v[k] = signal / total;
    aux.e[k] = 1.0 - signal * signal / total;

    const double clamped = std::clamp(aux.e[k], kErrorClamp, 1.0 - kErrorClamp);
    if (clamped != aux.e[k]) ++aux.clamp_events;
    aux.omega[k] = objective == Objective::kSumSE ? 1.0 / clamped : -1.0 / (clamped * std::log(clamped));
  }
  return aux;
}

double QuadraticSubproblem::objective(const Matrix& mu) const {
  double total = 0.0;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const Vector m = mu.row(i).transpose();
    total += m.dot(C[i] * m) - 2.0 * q.row(i).dot(m.transpose());
  }
  return total;
}

QuadraticSubproblem build_subproblem(const SEParameters& params, const Vector& omega, const Vector& v,
                                     double budget) {
  const int K = params.num_ues;
  const int L = params.num_aps;
  QuadraticSubproblem p;
  p.budget = budget;
  p.q.resize(K, L);
  p.C.assign(K, Matrix::Zero(L, L));
  for (int i = 0; i < K; ++i) {
    for (int k = 0; k < K; ++k) p.C[i] += omega[k] * v[k] * v[k] * params.b(k, i);
    Matrix sym = 0.5 * (p.C[i] + p.C[i].transpose());
    const Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    const Vector& eig = es.eigenvalues();
    const double spread = std::max(1.0, eig.cwiseAbs().maxCoeff());
    if (eig.minCoeff() < -kPsdFloor * spread) {
      throw std::runtime_error("subproblem quadratic form is not positive semidefinite");
    }
    if (eig.minCoeff() < 0.0) {
      sym = es.eigenvectors() * eig.cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
    }
    p.C[i] = std::move(sym);
    p.q.row(i) = omega[i] * v[i] * params.a.row(i);
  }
  return p;
}

void project_per_ap(Matrix& mu, double budget) {
  const double radius = std::sqrt(budget);
  for (Eigen::Index l = 0; l < mu.cols(); ++l) {
    const double norm = mu.col(l).norm();
    if (norm > radius) mu.col(l) *= radius / norm;
  }
}

void project_feasible(Matrix& mu, double budget, bool nonnegative) {
  if (nonnegative) mu = mu.cwiseMax(0.0);
  project_per_ap(mu, budget);
}

SubproblemResult solve_quadratic(const QuadraticSubproblem& problem, const SubproblemConfig& cfg,
                                 const std::optional<Matrix>& warm_start) {
  Matrix start = warm_start ? *warm_start : Matrix::Zero(problem.q.rows(), problem.q.cols());
  project_feasible(start, problem.budget, cfg.nonnegative);
  return cfg.method == SubproblemMethod::kADMM ? solve_admm(problem, cfg, std::move(start))
                                               : solve_projected_gradient(problem, cfg, std::move(start));
}

SubproblemResult solve_subproblem(const SEParameters& params, const Vector& omega, const Vector& v,
                                  double budget, const SubproblemConfig& cfg,
                                  const std::optional<Matrix>& warm_start) {
  if ((omega.array() <= 0.0).any()) throw std::invalid_argument("solve_subproblem: weights must be positive");
  return solve_quadratic(build_subproblem(params, omega, v, budget), cfg, warm_start);
}

double utility(const SEParameters& params, const Matrix& mu, Objective objective) {
  const Vector sinr = compute_sinr(params, mu);
  double total = 0.0;
  for (Eigen::Index k = 0; k < sinr.size(); ++k) {
    const double rate = std::log2(1.0 + sinr[k]);
    total += objective == Objective::kSumSE ? rate : std::log(rate);
  }
  return total;
}

SEParameters normalized(const SEParameters& params, double p_max) {
  SEParameters n = params;
  const double amp = std::sqrt(p_max / params.sigma2);
  n.a *= amp;
  for (auto& b : n.B) b *= amp * amp;
  n.sigma2 = 1.0;
  return n;
}

WmmseResult wmmse_solve(const SEParameters& params, const SolverConfig& cfg, double p_max,
                        const std::optional<Matrix>& init) {
  cfg.validate();
  if (!(p_max > 0.0)) throw std::invalid_argument("wmmse_solve: budget must be positive");
  const int K = params.num_ues;
  const int L = params.num_aps;
  if (cfg.init == InitPolicy::kFractionalHeuristic && !init) {
    throw std::invalid_argument("wmmse_solve: fractional-heuristic init requires an initial allocation");
  }

  const SEParameters np = normalized(params, p_max);
  Matrix mu = init ? Matrix(*init / std::sqrt(p_max)) : Matrix::Constant(K, L, std::sqrt(1.0 / K));
  if (mu.rows() != K || mu.cols() != L) throw std::invalid_argument("wmmse_solve: init has wrong shape");
  mu = mu.cwiseAbs();
  project_per_ap(mu, 1.0);

  if (cfg.objective == Objective::kProportionalFairness && (compute_sinr(np, mu).array() <= 0.0).any()) {
    throw std::invalid_argument("wmmse_solve: PF needs a strictly positive SINR for every UE at init");
  }

  WmmseResult res;
  const auto record = [&](const Matrix& m) {
    res.trace.push_back(utility(np, m, cfg.objective));
    res.max_violation.push_back(std::max(0.0, m.cwiseAbs2().colwise().sum().maxCoeff() - 1.0));
  };
  record(mu);

  for (int n = 1; n <= cfg.max_outer_iters; ++n) {
    const Auxiliaries aux = update_auxiliaries(np, mu, cfg.objective);
    res.clamp_events += aux.clamp_events;
    SubproblemResult sub = solve_subproblem(np, aux.omega, aux.v, 1.0, cfg.subproblem, mu);
    if (!sub.converged) ++res.unconverged_subproblems;
    mu = std::move(sub.mu);
    record(mu);
    res.iterations = n;
    const double delta = res.trace[res.trace.size() - 1] - res.trace[res.trace.size() - 2];
    if (delta * delta < cfg.eps_outer) {
      res.converged = true;
      break;
    }
  }
  res.alloc.mu = mu * std::sqrt(p_max);
  return res;
}

void write_trace_csv(std::ostream& out, const WmmseResult& result) {
  out << "iter,utility,max_constraint_violation\n";
  out.precision(17);
  for (std::size_t n = 0; n < result.trace.size(); ++n) {
    out << n << ',' << result.trace[n] << ',' << result.max_violation[n] << '\n';
  }
}

}  // namespace cellfree
