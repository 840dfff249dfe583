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

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cellfree/common.hpp"
#include "cellfree/precoding.hpp"

namespace cellfree {

enum class Objective { kSumSE, kProportionalFairness };

enum class SubproblemMethod { kADMM, kProjectedGradient };

struct SubproblemConfig {
  SubproblemMethod method = SubproblemMethod::kADMM;
  /// ADMM penalty, relative to the mean diagonal of the quadratic forms C_i.
  double rho = 1.0;
  double eps_inner = 1e-6;
  int max_iters = 20000;
  /// Restrict the subproblem to mu >= 0. Without it the final sign flip can undo the descent step.
  bool nonnegative = true;
};

enum class InitPolicy { kEqualPower, kFractionalHeuristic };

struct SolverConfig {
  Objective objective = Objective::kSumSE;
  double eps_outer = 1e-4;  // on the squared change of the utility
  int max_outer_iters = 500;
  SubproblemConfig subproblem;
  InitPolicy init = InitPolicy::kEqualPower;

  void validate() const;
};

inline constexpr double kErrorClamp = 1e-12;

struct Auxiliaries {
  Vector v;       // receiver weights
  Vector e;       // MSEs, before clamping
  Vector omega;   // utility weights from the clamped MSEs
  std::size_t clamp_events = 0;
};

/// Receiver weights, MSEs and utility weights for the current square-root powers.
Auxiliaries update_auxiliaries(const SEParameters& params, const Matrix& mu, Objective objective);

struct SubproblemResult {
  Matrix mu;               // feasible, nonnegative
  double objective = 0.0;  // canonical objective sum_i mu_i^T C_i mu_i - 2 q_i^T mu_i before the sign flip
  int iterations = 0;
  bool converged = false;
};

/// Quadratic forms C_i = sym(sum_k omega_k v_k^2 B_ki), clipped to PSD, and linear terms q_i = omega_i v_i a_i.
struct QuadraticSubproblem {
  std::vector<Matrix> C;  // K matrices L x L
  Matrix q;               // K x L, row i is q_i
  double budget = 1.0;

  double objective(const Matrix& mu) const;
};

/// Throws std::runtime_error when a C_i has an eigenvalue below -1e-8 relative to its spectrum.
QuadraticSubproblem build_subproblem(const SEParameters& params, const Vector& omega, const Vector& v,
                                     double budget);

/// Radial projection of each column (AP) of mu onto the ball of radius sqrt(budget).
void project_per_ap(Matrix& mu, double budget);

/// Euclidean projection onto the subproblem's feasible set: per-AP balls, intersected with the
/// nonnegative orthant when `nonnegative` is set (clip, then scale).
void project_feasible(Matrix& mu, double budget, bool nonnegative);

/// Minimizes the weighted-MSE subproblem under per-AP power balls. `warm_start` seeds the
/// consensus variable. Negative entries of the result are replaced by their magnitudes.
SubproblemResult solve_subproblem(const SEParameters& params, const Vector& omega, const Vector& v,
                                  double budget, const SubproblemConfig& cfg,
                                  const std::optional<Matrix>& warm_start = std::nullopt);

SubproblemResult solve_quadratic(const QuadraticSubproblem& problem, const SubproblemConfig& cfg,
                                 const std::optional<Matrix>& warm_start = std::nullopt);

/// sum_k log2(1 + SINR_k) or sum_k ln(log2(1 + SINR_k)).
double utility(const SEParameters& params, const Matrix& mu, Objective objective);

struct WmmseResult {
  PowerAllocation alloc;
  std::vector<double> trace;          // utility after init and after every outer iteration
  std::vector<double> max_violation;  // per-AP relative budget excess for each trace entry
  int iterations = 0;
  bool converged = false;
  std::size_t unconverged_subproblems = 0;
  std::size_t clamp_events = 0;
};

/// Scaled copy with sigma^2 = 1 and unit power budget; SINRs are unchanged when mu is divided by sqrt(p_max).
SEParameters normalized(const SEParameters& params, double p_max);

/// Alternates auxiliary updates and the convex subproblem until the squared utility change drops
/// below eps_outer. `init` overrides the equal-power start; it is required for the fractional policy.
WmmseResult wmmse_solve(const SEParameters& params, const SolverConfig& cfg, double p_max,
                        const std::optional<Matrix>& init = std::nullopt);

/// CSV with header `iter,utility,max_constraint_violation`.
void write_trace_csv(std::ostream& out, const WmmseResult& result);

}  // namespace cellfree
