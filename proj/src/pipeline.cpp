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

#include "cellfree/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cellfree/binary_io.hpp"
#include "cellfree/heuristic.hpp"
#include "cellfree/parallel.hpp"

namespace cellfree {
namespace {

constexpr std::uint32_t kDatasetFormatVersion = 1;

const std::set<std::string>& pipeline_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k = network_config_keys();
    k.insert({"realizations", "cluster_size", "eps_outer", "max_outer_iters", "subproblem", "admm_rho", "eps_inner",
              "max_inner_iters", "init", "lr_initial", "lr_drop_factor", "drop_epoch", "batch_size", "epochs",
              "train_seed", "validation_fraction", "max_degenerate_fraction", "workers"});
    return k;
  }();
  return keys;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void require_feasible(const PowerAllocation& alloc, double p_max, const std::string& who) {
  if (!is_feasible(alloc, p_max) || (alloc.mu.array() < 0.0).any()) {
    throw std::logic_error(who + " produced an allocation that violates the per-AP budget");
  }
}

}  // namespace

PipelineConfig pipeline_config_from(const KeyValueFile& kv) {
  kv.reject_unknown(pipeline_keys());
  PipelineConfig cfg;
  cfg.network = network_config_from(kv);
  cfg.realizations = static_cast<int>(kv.get_int("realizations", cfg.realizations));
  cfg.cluster_size = static_cast<int>(kv.get_int("cluster_size", cfg.cluster_size));

  SolverConfig& s = cfg.solver;
  s.eps_outer = kv.get_double("eps_outer", s.eps_outer);
  s.max_outer_iters = static_cast<int>(kv.get_int("max_outer_iters", s.max_outer_iters));
  s.subproblem.rho = kv.get_double("admm_rho", s.subproblem.rho);
  s.subproblem.eps_inner = kv.get_double("eps_inner", s.subproblem.eps_inner);
  s.subproblem.max_iters = static_cast<int>(kv.get_int("max_inner_iters", s.subproblem.max_iters));
  const std::string sub = kv.get_string("subproblem", "admm");
  if (sub == "admm") {
    s.subproblem.method = SubproblemMethod::kADMM;
  } else if (sub == "projected-gradient") {
    s.subproblem.method = SubproblemMethod::kProjectedGradient;
  } else {
    throw DataError("config: subproblem must be admm or projected-gradient");
  }
  const std::string init = kv.get_string("init", "equal-power");
  if (init == "equal-power") {
    s.init = InitPolicy::kEqualPower;
  } else if (init == "fractional-heuristic") {
    s.init = InitPolicy::kFractionalHeuristic;
  } else {
    throw DataError("config: init must be equal-power or fractional-heuristic");
  }

  TrainConfig& t = cfg.train;
  t.lr_initial = kv.get_double("lr_initial", t.lr_initial);
  t.lr_drop_factor = kv.get_double("lr_drop_factor", t.lr_drop_factor);
  t.drop_epoch = static_cast<int>(kv.get_int("drop_epoch", t.drop_epoch));
  t.batch_size = static_cast<int>(kv.get_int("batch_size", t.batch_size));
  t.epochs = static_cast<int>(kv.get_int("epochs", t.epochs));
  t.seed = static_cast<std::uint64_t>(kv.get_int("train_seed", static_cast<long long>(t.seed)));
  t.validation_fraction = kv.get_double("validation_fraction", t.validation_fraction);
  cfg.max_degenerate_fraction = kv.get_double("max_degenerate_fraction", cfg.max_degenerate_fraction);
  cfg.workers = static_cast<unsigned>(kv.get_int("workers", 0));

  if (cfg.realizations < static_cast<int>(kMinRealizations)) throw DataError("config: realizations must be >= 100");
  try {
    s.validate();
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) { return pipeline_config_from(KeyValueFile::load(path)); }

std::string to_string(Objective objective) { return objective == Objective::kSumSE ? "sumse" : "pf"; }
std::string to_string(Precoder precoder) { return precoder == Precoder::kMR ? "mr" : "rzf"; }

Objective parse_objective(const std::string& name) {
  if (name == "sumse") return Objective::kSumSE;
  if (name == "pf") return Objective::kProportionalFairness;
  throw std::invalid_argument("objective must be sumse or pf");
}

Precoder parse_precoder(const std::string& name) {
  if (name == "mr") return Precoder::kMR;
  if (name == "rzf") return Precoder::kRZF;
  throw std::invalid_argument("precoder must be mr or rzf");
}

DropInstance simulate_drop(const NetworkConfig& cfg, Precoder precoder, std::uint64_t seed, int realizations) {
  DropInstance d;
  d.seed = seed;
  d.scenario = drop_scenario(cfg, derive_seed(seed, 1));
  d.stats = build_statistics(cfg, d.scenario);
  d.pilots = assign_pilots(d.stats.beta, cfg.tau_p);
  ChannelBatch batch = mmse_estimate(sample_channels(d.stats, realizations, derive_seed(seed, 2)), d.stats,
                                     d.pilots, cfg, derive_seed(seed, 3));
  const Precoders w = compute_precoders(batch, precoder, cfg.p_ul, cfg.noise_power);
  d.degenerate_precoders = w.degenerate;
  d.params = estimate_se_parameters(batch, w, cfg);
  return d;
}

NetworkConfig Dataset::network() const { return network_config_from(KeyValueFile::parse(header.config_text)); }

void Dataset::validate() const {
  const NetworkConfig net = network();
  for (const auto& s : samples) {
    if (s.beta.rows() != net.num_ues || s.beta.cols() != net.num_aps || s.mu_star.rows() != net.num_ues ||
        s.mu_star.cols() != net.num_aps || static_cast<int>(s.pilots.size()) != net.num_ues) {
      throw DataError("dataset sample " + std::to_string(s.index) + " has the wrong shape");
    }
    if (!is_feasible({s.mu_star}, net.p_max_dl) || (s.mu_star.array() < 0.0).any()) {
      throw DataError("dataset sample " + std::to_string(s.index) + " has an infeasible label");
    }
  }
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  const NetworkConfig net = ds.network();
  io::Writer w(out);
  w.magic("CFDS");
  w.u32(kDatasetFormatVersion);
  w.string(ds.header.config_text);
  w.u32(static_cast<std::uint32_t>(ds.header.objective));
  w.u32(static_cast<std::uint32_t>(ds.header.precoder));
  w.u64(ds.header.master_seed);
  w.u8(ds.header.full_params ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(net.num_ues));
  w.u32(static_cast<std::uint32_t>(net.num_aps));
  w.u64(ds.samples.size());
  for (const auto& s : ds.samples) {
    w.u64(s.index);
    w.u64(s.seed);
    w.matrix(s.beta);
    for (const int p : s.pilots) w.u32(static_cast<std::uint32_t>(p));
    w.u64(s.params_digest);
    if (ds.header.full_params) {
      if (!s.params) throw DataError("dataset marked full but sample lacks SE parameters");
      write_se_parameters(out, *s.params);
    }
    w.matrix(s.mu_star);
    w.u32(s.outer_iterations);
    w.f64(s.final_utility);
    w.u8(s.converged ? 1 : 0);
    w.u8(s.trace_monotone ? 1 : 0);
    w.u32(s.unconverged_subproblems);
  }
}

Dataset read_dataset(std::istream& in) {
  io::Reader r(in);
  r.expect_magic("CFDS");
  if (const auto v = r.u32(); v != kDatasetFormatVersion) {
    throw DataError("unsupported dataset format version " + std::to_string(v));
  }
  Dataset ds;
  ds.header.config_text = r.string();
  const auto objective = r.u32();
  const auto precoder = r.u32();
  if (objective > 1 || precoder > 1) throw DataError("dataset header: bad objective or precoder tag");
  ds.header.objective = static_cast<Objective>(objective);
  ds.header.precoder = static_cast<Precoder>(precoder);
  ds.header.master_seed = r.u64();
  ds.header.full_params = r.u8() != 0;
  const NetworkConfig net = ds.network();
  const auto K = static_cast<int>(r.u32());
  const auto L = static_cast<int>(r.u32());
  if (K != net.num_ues || L != net.num_aps) throw DataError("dataset header dimensions disagree with its config");
  const std::uint64_t count = r.u64();
  for (std::uint64_t j = 0; j < count; ++j) {
    DatasetSample s;
    s.index = r.u64();
    s.seed = r.u64();
    s.beta = r.matrix(K, L);
    s.pilots.resize(K);
    for (auto& p : s.pilots) {
      p = static_cast<int>(r.u32());
      if (p < 0 || p >= net.tau_p) throw DataError("dataset: pilot index out of range");
    }
    s.params_digest = r.u64();
    if (ds.header.full_params) {
      s.params = read_se_parameters(in);
      if (s.params->num_ues != K || s.params->num_aps != L) throw DataError("dataset: SE parameter shape mismatch");
    }
    s.mu_star = r.matrix(K, L);
    s.outer_iterations = r.u32();
    s.final_utility = r.f64();
    s.converged = r.u8() != 0;
    s.trace_monotone = r.u8() != 0;
    s.unconverged_subproblems = r.u32();
    ds.samples.push_back(std::move(s));
  }
  if (!r.at_end()) throw DataError("dataset: trailing bytes after the last sample");
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset '" + path.string() + "'");
  write_dataset(out, ds);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  return read_dataset(in);
}

bool trace_is_monotone(const std::vector<double>& trace, double eps_inner) {
  for (std::size_t n = 1; n < trace.size(); ++n) {
    if (trace[n] < trace[n - 1] - 10.0 * eps_inner) return false;
  }
  return true;
}

Dataset generate_dataset(const PipelineConfig& cfg, std::uint64_t n_samples, Objective objective, Precoder precoder,
                         std::uint64_t master_seed, bool full_params, const Dataset* resume) {
  const NetworkConfig& net = cfg.network;
  net.validate();
  Dataset ds;
  ds.header = {to_config_text(net), objective, precoder, master_seed, full_params};

  std::size_t kept = 0;
  if (resume != nullptr) {
    const DatasetHeader& h = resume->header;
    if (h.config_text != ds.header.config_text || h.objective != objective || h.precoder != precoder ||
        h.master_seed != master_seed || h.full_params != full_params) {
      throw DataError("cannot resume: existing dataset was generated with different settings");
    }
    kept = std::min<std::size_t>(resume->samples.size(), n_samples);
    for (std::size_t j = 0; j < kept; ++j) {
      if (resume->samples[j].index != j) throw DataError("cannot resume: existing samples are not contiguous");
      ds.samples.push_back(resume->samples[j]);
    }
  }

  SolverConfig solver = cfg.solver;
  solver.objective = objective;
  ds.samples.resize(n_samples);
  parallel_for(
      n_samples - kept,
      [&](std::size_t offset) {
        const std::uint64_t index = kept + offset;
        const std::uint64_t seed = namespaced_seed(master_seed, SeedNamespace::kTrain, index);
        DropInstance drop = simulate_drop(net, precoder, seed, cfg.realizations);
        std::optional<Matrix> init;
        if (solver.init == InitPolicy::kFractionalHeuristic) {
          init = heuristic_allocation(drop.stats.beta, net.v_exponent, net.p_max_dl).mu;
        }
        const WmmseResult res = wmmse_solve(drop.params, solver, net.p_max_dl, init);

        DatasetSample s;
        s.index = index;
        s.seed = seed;
        s.beta = drop.stats.beta;
        s.pilots = drop.pilots.pilot;
        s.params_digest = digest(drop.params);
        if (full_params) s.params = std::move(drop.params);
        s.mu_star = res.alloc.mu;
        s.outer_iterations = static_cast<std::uint32_t>(res.iterations);
        s.final_utility = res.trace.back();
        s.converged = res.converged;
        s.trace_monotone = trace_is_monotone(res.trace, solver.subproblem.eps_inner);
        s.unconverged_subproblems = static_cast<std::uint32_t>(res.unconverged_subproblems);
        ds.samples[index] = std::move(s);
      },
      cfg.workers);
  return ds;
}

std::vector<std::vector<int>> model_groups(ModelKind kind, const PipelineConfig& cfg) {
  const int L = cfg.network.num_aps;
  if (kind == ModelKind::kCDNN) {
    return cluster_members(cluster_partition(L, cfg.cluster_size, place_aps(cfg.network)));
  }
  std::vector<std::vector<int>> groups;
  for (int l = 0; l < L; ++l) groups.push_back({l});
  return groups;
}

TrainedAllocator train_allocator(const Dataset& ds, ModelKind kind, const PipelineConfig& cfg) {
  if (ds.samples.empty()) throw DataError("cannot train on an empty dataset");
  ds.validate();
  const NetworkConfig net = ds.network();
  if (net.num_ues != cfg.network.num_ues || net.num_aps != cfg.network.num_aps) {
    throw DataError("dataset dimensions do not match the configuration");
  }
  const int K = net.num_ues;
  const auto groups = model_groups(kind, cfg);
  const auto n = static_cast<Eigen::Index>(ds.samples.size());
  const DataSplit split = split_indices(ds.samples.size(), cfg.train);

  TrainedAllocator out;
  out.allocator.kind = kind;
  out.allocator.groups = groups;
  out.allocator.models.resize(groups.size());
  out.reports.resize(groups.size());
  parallel_for(
      groups.size(),
      [&](std::size_t j) {
        const auto& aps = groups[j];
        MlpModel model = build_model(kind, K, static_cast<int>(aps.size()), cfg.train.seed, static_cast<int>(j));
        Matrix x(n, model.input_size());
        Matrix y(n, model.output_size());
        for (Eigen::Index i = 0; i < n; ++i) {
          const auto& s = ds.samples[static_cast<std::size_t>(i)];
          x.row(i) = model_features(kind, s.beta, net.v_exponent, net.p_max_dl, aps).transpose();
          y.row(i) = model_label(s.mu_star, aps).transpose();
        }
        Matrix train_rows(static_cast<Eigen::Index>(split.train.size()), x.cols());
        for (std::size_t r = 0; r < split.train.size(); ++r) {
          train_rows.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(split.train[r]));
        }
        model.scaler = robust_scale_fit(train_rows);
        robust_scale_apply(model.scaler, x);
        out.reports[j] = train(model.layers, x, y, cfg.train);
        out.allocator.models[j] = std::move(model);
      },
      cfg.workers);
  return out;
}

std::filesystem::path model_path(const std::filesystem::path& dir, ModelKind kind, int id) {
  return dir / (to_string(kind) + "_" + std::to_string(id) + ".cfnn");
}

void save_allocator(const std::filesystem::path& dir, const TrainedAllocator& trained) {
  std::filesystem::create_directories(dir);
  const ModelKind kind = trained.allocator.kind;
  for (std::size_t j = 0; j < trained.allocator.models.size(); ++j) {
    const auto& model = trained.allocator.models[j];
    std::ofstream out(model_path(dir, kind, model.id), std::ios::binary);
    if (!out) throw DataError("cannot write model file in '" + dir.string() + "'");
    write_model(out, model);
    if (j < trained.reports.size()) {
      std::ofstream csv(dir / (to_string(kind) + "_" + std::to_string(model.id) + "_loss.csv"));
      csv << "epoch,train_loss,validation_loss\n" << std::setprecision(17);
      const auto& rep = trained.reports[j];
      for (std::size_t e = 0; e < rep.train_loss.size(); ++e) {
        csv << e + 1 << ',' << rep.train_loss[e] << ',' << rep.validation_loss[e] << '\n';
      }
    }
  }
}

LearnedAllocator load_allocator(const std::filesystem::path& dir, ModelKind kind, const PipelineConfig& cfg) {
  LearnedAllocator a;
  a.kind = kind;
  a.groups = model_groups(kind, cfg);
  for (std::size_t j = 0; j < a.groups.size(); ++j) {
    const auto path = model_path(dir, kind, static_cast<int>(j));
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing model file '" + path.string() + "'");
    a.models.push_back(read_model(in));
  }
  try {
    a.validate(cfg.network.num_ues, cfg.network.num_aps);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("models in '") + dir.string() + "': " + e.what());
  }
  return a;
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kWmmseSumSE:
      return "wmmse-sumse";
    case Strategy::kWmmsePF:
      return "wmmse-pf";
    case Strategy::kDDNN:
      return "ddnn";
    case Strategy::kDDNNSI:
      return "ddnn-si";
    case Strategy::kCDNN:
      return "cdnn";
    case Strategy::kHeuristic:
      return "heuristic";
    case Strategy::kEqual:
      return "equal";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  for (const Strategy s : {Strategy::kWmmseSumSE, Strategy::kWmmsePF, Strategy::kDDNN, Strategy::kDDNNSI,
                           Strategy::kCDNN, Strategy::kHeuristic, Strategy::kEqual}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

std::vector<Strategy> parse_strategies(const std::string& comma_separated) {
  std::vector<Strategy> out;
  std::stringstream ss(comma_separated);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_strategy(item));
  }
  if (std::find(out.begin(), out.end(), Strategy::kEqual) == out.end()) out.push_back(Strategy::kEqual);
  return out;
}

const StrategyResult& EvalReport::at(Strategy s) const {
  for (const auto& r : results) {
    if (r.strategy == s) return r;
  }
  throw std::out_of_range("strategy " + to_string(s) + " not in report");
}

std::vector<std::pair<double, double>> empirical_cdf(const Matrix& se) {
  std::vector<double> values(se.data(), se.data() + se.size());
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> cdf;
  cdf.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    cdf.emplace_back(values[i], static_cast<double>(i + 1) / static_cast<double>(values.size()));
  }
  return cdf;
}

double percentile(const Matrix& se, double q) {
  return quantile(Eigen::Map<const Vector>(se.data(), se.size()), q);
}

EvalReport evaluate(const PipelineConfig& cfg, const std::vector<Strategy>& strategies, std::uint64_t n_drops,
                    Precoder precoder, std::uint64_t master_seed,
                    const std::map<ModelKind, LearnedAllocator>& learned) {
  const NetworkConfig& net = cfg.network;
  const int K = net.num_ues;
  const auto learned_kind = [](Strategy s) -> std::optional<ModelKind> {
    if (s == Strategy::kDDNN) return ModelKind::kDDNN;
    if (s == Strategy::kDDNNSI) return ModelKind::kDDNNSI;
    if (s == Strategy::kCDNN) return ModelKind::kCDNN;
    return std::nullopt;
  };
  for (const Strategy s : strategies) {
    if (const auto kind = learned_kind(s); kind && !learned.contains(*kind)) {
      throw DataError("no trained models for strategy " + to_string(s));
    }
  }

  EvalReport report;
  for (const Strategy s : strategies) {
    StrategyResult r;
    r.strategy = s;
    r.se = Matrix::Zero(static_cast<Eigen::Index>(n_drops), K);
    r.params_digest.assign(n_drops, 0);
    r.seconds.assign(n_drops, 0.0);
    report.results.push_back(std::move(r));
  }
  report.drop_seeds.resize(n_drops);
  std::vector<std::vector<std::size_t>> flags(n_drops, std::vector<std::size_t>(strategies.size(), 0));

  parallel_for(
      n_drops,
      [&](std::size_t d) {
        const std::uint64_t seed = namespaced_seed(master_seed, SeedNamespace::kTest, d);
        report.drop_seeds[d] = seed;
        const DropInstance drop = simulate_drop(net, precoder, seed, cfg.realizations);
        const std::uint64_t dig = digest(drop.params);
        for (std::size_t j = 0; j < strategies.size(); ++j) {
          const Strategy s = strategies[j];
          PowerAllocation alloc;
          const auto start = std::chrono::steady_clock::now();
          if (s == Strategy::kWmmseSumSE || s == Strategy::kWmmsePF) {
            SolverConfig solver = cfg.solver;
            solver.objective = s == Strategy::kWmmseSumSE ? Objective::kSumSE : Objective::kProportionalFairness;
            std::optional<Matrix> init;
            if (solver.init == InitPolicy::kFractionalHeuristic) {
              init = heuristic_allocation(drop.stats.beta, net.v_exponent, net.p_max_dl).mu;
            }
            WmmseResult res = wmmse_solve(drop.params, solver, net.p_max_dl, init);
            flags[d][j] = res.converged ? 0 : 1;
            alloc = std::move(res.alloc);
          } else if (const auto kind = learned_kind(s)) {
            LearnedPrediction pred = predict_allocation(learned.at(*kind), drop.stats.beta, net.v_exponent, net.p_max_dl);
            flags[d][j] = pred.degenerate_aps;
            alloc = std::move(pred.alloc);
          } else if (s == Strategy::kHeuristic) {
            alloc = heuristic_allocation(drop.stats.beta, net.v_exponent, net.p_max_dl);
          } else {
            alloc = equal_power(K, net.num_aps, net.p_max_dl);
          }
          StrategyResult& r = report.results[j];
          r.seconds[d] = seconds_since(start);
          require_feasible(alloc, net.p_max_dl, to_string(s));
          r.se.row(static_cast<Eigen::Index>(d)) = compute_se(drop.params, alloc, net.p_max_dl).transpose();
          r.params_digest[d] = dig;
        }
      },
      cfg.workers);

  for (std::size_t j = 0; j < strategies.size(); ++j) {
    for (std::size_t d = 0; d < n_drops; ++d) report.results[j].flagged += flags[d][j];
  }
  return report;
}

void write_eval_summary(std::ostream& out, const EvalReport& report) {
  out << "strategy,mean_total_se,mean_ue_se,p10_ue_se,p50_ue_se,flagged,mean_seconds\n" << std::setprecision(10);
  for (const auto& r : report.results) {
    const double mean_time =
        r.seconds.empty() ? 0.0 : std::accumulate(r.seconds.begin(), r.seconds.end(), 0.0) / r.seconds.size();
    const bool empty = r.se.size() == 0;
    out << to_string(r.strategy) << ',' << (empty ? 0.0 : r.se.rowwise().sum().mean()) << ','
        << (empty ? 0.0 : r.se.mean()) << ',' << (empty ? 0.0 : percentile(r.se, 0.1)) << ','
        << (empty ? 0.0 : percentile(r.se, 0.5)) << ',' << r.flagged << ',' << mean_time << '\n';
  }
}

void write_eval_csvs(const std::filesystem::path& dir, const EvalReport& report) {
  std::filesystem::create_directories(dir);
  std::ofstream per_ue(dir / "per_ue_se.csv");
  per_ue << "strategy,drop,ue,se\n" << std::setprecision(12);
  std::ofstream cdf(dir / "cdf.csv");
  cdf << "strategy,se,cdf\n" << std::setprecision(12);
  for (const auto& r : report.results) {
    for (Eigen::Index d = 0; d < r.se.rows(); ++d) {
      for (Eigen::Index k = 0; k < r.se.cols(); ++k) {
        per_ue << to_string(r.strategy) << ',' << d << ',' << k << ',' << r.se(d, k) << '\n';
      }
    }
    for (const auto& [value, prob] : empirical_cdf(r.se)) cdf << to_string(r.strategy) << ',' << value << ',' << prob << '\n';
  }
  std::ofstream summary(dir / "summary.csv");
  write_eval_summary(summary, report);
}

std::vector<BenchRow> bench(const PipelineConfig& cfg, const std::vector<std::string>& algorithms, int n_repeats,
                            std::uint64_t master_seed, const std::map<ModelKind, LearnedAllocator>& learned) {
  if (n_repeats < 1) throw std::invalid_argument("bench needs at least one repeat");
  const NetworkConfig& net = cfg.network;

  std::map<ModelKind, LearnedAllocator> models = learned;
  for (const ModelKind kind : {ModelKind::kDDNN, ModelKind::kDDNNSI, ModelKind::kCDNN}) {
    if (models.contains(kind)) continue;
    if (std::find(algorithms.begin(), algorithms.end(), to_string(kind)) == algorithms.end()) continue;
    LearnedAllocator a;
    a.kind = kind;
    a.groups = model_groups(kind, cfg);
    for (std::size_t j = 0; j < a.groups.size(); ++j) {
      a.models.push_back(build_model(kind, net.num_ues, static_cast<int>(a.groups[j].size()), cfg.train.seed,
                                     static_cast<int>(j)));
    }
    models.emplace(kind, std::move(a));
  }

  std::vector<BenchRow> rows;
  for (const auto& name : algorithms) rows.push_back({name, {}});
  volatile double sink = 0.0;

  std::uint64_t instance = 0;
  for (const Objective objective : {Objective::kSumSE, Objective::kProportionalFairness}) {
    for (const Precoder precoder : {Precoder::kMR, Precoder::kRZF}) {
      const DropInstance drop = simulate_drop(
          net, precoder, namespaced_seed(master_seed, SeedNamespace::kBench, instance++), cfg.realizations);
      SolverConfig solver = cfg.solver;
      solver.objective = objective;
      for (auto& row : rows) {
        std::function<double()> run;
        if (row.algorithm == "admm") {
          run = [&] { return wmmse_solve(drop.params, solver, net.p_max_dl).alloc.mu.sum(); };
        } else if (row.algorithm == "ddnn" || row.algorithm == "ddnn-si" || row.algorithm == "cdnn") {
          const LearnedAllocator& a = models.at(parse_model_kind(row.algorithm));
          auto features = std::make_shared<std::vector<Vector>>(
              prepare_features(a, drop.stats.beta, net.v_exponent, net.p_max_dl));
          run = [&a, features, &net] {
            return predict_from_features(a, *features, net.num_ues, net.num_aps, net.p_max_dl).alloc.mu.sum();
          };
        } else if (row.algorithm == "heuristic") {
          run = [&] { return heuristic_allocation(drop.stats.beta, net.v_exponent, net.p_max_dl).mu.sum(); };
        } else if (row.algorithm == "equal") {
          run = [&] { return equal_power(net.num_ues, net.num_aps, net.p_max_dl).mu.sum(); };
        } else if (row.algorithm == "noop") {
          run = [] { return 0.0; };
        } else {
          throw std::invalid_argument("unknown bench algorithm '" + row.algorithm + "'");
        }
        sink = sink + run();  // warm-up
        const auto start = std::chrono::steady_clock::now();
        for (int rep = 0; rep < n_repeats; ++rep) sink = sink + run();
        row.seconds[{objective, precoder}] = seconds_since(start) / n_repeats;
      }
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "algorithm,sumse_mr,sumse_rzf,pf_mr,pf_rzf\n" << std::setprecision(6) << std::scientific;
  for (const auto& row : rows) {
    out << row.algorithm;
    for (const Objective o : {Objective::kSumSE, Objective::kProportionalFairness}) {
      for (const Precoder p : {Precoder::kMR, Precoder::kRZF}) {
        const auto it = row.seconds.find({o, p});
        out << ',' << (it == row.seconds.end() ? 0.0 : it->second);
      }
    }
    out << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace cellfree
