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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cellfree/config.hpp"
#include "cellfree/estimation.hpp"
#include "cellfree/learned.hpp"
#include "cellfree/mlp.hpp"
#include "cellfree/network.hpp"
#include "cellfree/precoding.hpp"
#include "cellfree/wmmse.hpp"

namespace cellfree {

/// Everything a run needs: the network plus Monte-Carlo, solver and training settings.
struct PipelineConfig {
  NetworkConfig network;
  int realizations = 1000;
  int cluster_size = 4;
  SolverConfig solver;
  TrainConfig train;
  double max_degenerate_fraction = 0.05;  // share of unconverged solves tolerated before exit code 3
  unsigned workers = 0;                   // 0 = hardware concurrency
};

PipelineConfig pipeline_config_from(const KeyValueFile& kv);
PipelineConfig load_pipeline_config(const std::string& path);

std::string to_string(Objective objective);
std::string to_string(Precoder precoder);
Objective parse_objective(const std::string& name);
Precoder parse_precoder(const std::string& name);

/// One UE drop carried through estimation and bound statistics.
struct DropInstance {
  std::uint64_t seed = 0;
  Scenario scenario;
  ChannelStatistics stats;
  PilotAssignment pilots;
  SEParameters params;
  std::size_t degenerate_precoders = 0;
};

DropInstance simulate_drop(const NetworkConfig& cfg, Precoder precoder, std::uint64_t seed, int realizations);

/// Per-drop training record.
struct DatasetSample {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  Matrix beta;                     // K x L
  std::vector<int> pilots;
  std::optional<SEParameters> params;  // absent when only the digest is stored
  std::uint64_t params_digest = 0;
  Matrix mu_star;                  // K x L
  std::uint32_t outer_iterations = 0;
  double final_utility = 0.0;
  bool converged = false;
  bool trace_monotone = true;
  std::uint32_t unconverged_subproblems = 0;
};

struct DatasetHeader {
  std::string config_text;  // canonical NetworkConfig
  Objective objective = Objective::kSumSE;
  Precoder precoder = Precoder::kMR;
  std::uint64_t master_seed = 0;
  bool full_params = true;
};

struct Dataset {
  DatasetHeader header;
  std::vector<DatasetSample> samples;

  NetworkConfig network() const;
  /// Throws DataError if a label is infeasible or a sample shape disagrees with the header.
  void validate() const;
};

/// Binary container: magic "CFDS", u32 version, header fields, u64 sample count, samples in index order.
void write_dataset(std::ostream& out, const Dataset& ds);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

/// A trace counts as monotone when no step drops by more than 10 * eps_inner.
bool trace_is_monotone(const std::vector<double>& trace, double eps_inner);

/// Solves n_samples training drops. Samples already in `resume` (same header) are kept; the rest are
/// generated from seeds in the training namespace of master_seed.
Dataset generate_dataset(const PipelineConfig& cfg, std::uint64_t n_samples, Objective objective, Precoder precoder,
                         std::uint64_t master_seed, bool full_params = true, const Dataset* resume = nullptr);

/// AP groups served by each model of a kind.
std::vector<std::vector<int>> model_groups(ModelKind kind, const PipelineConfig& cfg);

struct TrainedAllocator {
  LearnedAllocator allocator;
  std::vector<TrainReport> reports;
};

/// Fits scalers on the training split and trains one model per group.
TrainedAllocator train_allocator(const Dataset& ds, ModelKind kind, const PipelineConfig& cfg);

std::filesystem::path model_path(const std::filesystem::path& dir, ModelKind kind, int id);
void save_allocator(const std::filesystem::path& dir, const TrainedAllocator& trained);
LearnedAllocator load_allocator(const std::filesystem::path& dir, ModelKind kind, const PipelineConfig& cfg);

enum class Strategy { kWmmseSumSE, kWmmsePF, kDDNN, kDDNNSI, kCDNN, kHeuristic, kEqual };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);
std::vector<Strategy> parse_strategies(const std::string& comma_separated);

struct StrategyResult {
  Strategy strategy = Strategy::kEqual;
  Matrix se;                               // n_drops x K
  std::vector<std::uint64_t> params_digest;  // per drop, digest of the statistics the SE was evaluated on
  std::vector<double> seconds;             // per drop, allocation wall-clock
  std::size_t flagged = 0;                 // unconverged solves or degenerate learned outputs
};

struct EvalReport {
  std::vector<StrategyResult> results;
  std::vector<std::uint64_t> drop_seeds;

  const StrategyResult& at(Strategy s) const;
};

/// Empirical CDF points (sorted values, i/n) of every per-UE SE.
std::vector<std::pair<double, double>> empirical_cdf(const Matrix& se);
double percentile(const Matrix& se, double q);

/// Fresh test drops in the test seed namespace; every strategy is evaluated on the same statistics.
EvalReport evaluate(const PipelineConfig& cfg, const std::vector<Strategy>& strategies, std::uint64_t n_drops,
                    Precoder precoder, std::uint64_t master_seed,
                    const std::map<ModelKind, LearnedAllocator>& learned);

void write_eval_csvs(const std::filesystem::path& dir, const EvalReport& report);
void write_eval_summary(std::ostream& out, const EvalReport& report);

/// Runtime table rows: algorithm x {sum-SE, PF} x {MR, RZF}, mean seconds per network-wide allocation.
struct BenchRow {
  std::string algorithm;
  std::map<std::pair<Objective, Precoder>, double> seconds;
};

/// Times allocation only; statistics and learned-model inputs are prepared beforehand. Algorithms:
/// admm, ddnn, ddnn-si, cdnn, heuristic, equal, noop. Learned kinds fall back to freshly built
/// models when `learned` has none; weights do not change the cost of a forward pass.
std::vector<BenchRow> bench(const PipelineConfig& cfg, const std::vector<std::string>& algorithms, int n_repeats,
                            std::uint64_t master_seed, const std::map<ModelKind, LearnedAllocator>& learned);
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace cellfree
