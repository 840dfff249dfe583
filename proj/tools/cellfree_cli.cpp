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

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cellfree/pipeline.hpp"

namespace {

using namespace cellfree;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDegenerate = 3;

struct Options {
  std::string config;
  std::uint64_t seed = 1;
  std::uint64_t samples = 0;
  std::string objective = "sumse";
  std::string precoder = "mr";
  std::string kind = "ddnn";
  std::string out;
  std::string data;
  std::string models;
  std::string strategies = "wmmse-sumse,heuristic,equal";
  std::string algorithms = "admm,ddnn,ddnn-si,cdnn,heuristic,equal,noop";
  std::uint64_t drops = 200;
  int repeats = 20;
  bool resume = false;
  bool digest_only = false;
  std::string file;
};

std::map<ModelKind, LearnedAllocator> load_models(const std::string& dir, const PipelineConfig& cfg,
                                                  const std::vector<Strategy>& strategies) {
  std::map<ModelKind, LearnedAllocator> out;
  for (const Strategy s : strategies) {
    std::optional<ModelKind> kind;
    if (s == Strategy::kDDNN) kind = ModelKind::kDDNN;
    if (s == Strategy::kDDNNSI) kind = ModelKind::kDDNNSI;
    if (s == Strategy::kCDNN) kind = ModelKind::kCDNN;
    if (!kind) continue;
    if (dir.empty()) throw DataError("strategy " + to_string(s) + " needs --models");
    out.emplace(*kind, load_allocator(dir, *kind, cfg));
  }
  return out;
}

bool over_threshold(std::size_t flagged, std::size_t total, double fraction) {
  return total > 0 && static_cast<double>(flagged) > fraction * static_cast<double>(total);
}

int run_generate(const Options& o) {
  const PipelineConfig cfg = load_pipeline_config(o.config);
  std::optional<Dataset> previous;
  if (o.resume && std::filesystem::exists(o.out)) previous = load_dataset(o.out);
  const Dataset ds = generate_dataset(cfg, o.samples, parse_objective(o.objective), parse_precoder(o.precoder), o.seed,
                                      !o.digest_only, previous ? &*previous : nullptr);
  save_dataset(o.out, ds);
  std::size_t unconverged = 0;
  std::size_t non_monotone = 0;
  for (const auto& s : ds.samples) {
    unconverged += s.converged ? 0 : 1;
    non_monotone += s.trace_monotone ? 0 : 1;
  }
  std::cout << "samples " << ds.samples.size() << " unconverged " << unconverged << " non_monotone " << non_monotone
            << '\n';
  return over_threshold(unconverged, ds.samples.size(), cfg.max_degenerate_fraction) ? kExitDegenerate : kExitOk;
}

int run_train(const Options& o) {
  const PipelineConfig cfg = load_pipeline_config(o.config);
  const Dataset ds = load_dataset(o.data);
  const TrainedAllocator trained = train_allocator(ds, parse_model_kind(o.kind), cfg);
  save_allocator(o.out, trained);
  for (std::size_t j = 0; j < trained.reports.size(); ++j) {
    const auto& r = trained.reports[j];
    std::cout << o.kind << ' ' << j << " train_loss " << r.train_loss.back() << " validation_loss "
              << r.validation_loss.back() << '\n';
  }
  return kExitOk;
}

int run_evaluate(const Options& o) {
  const PipelineConfig cfg = load_pipeline_config(o.config);
  const auto strategies = parse_strategies(o.strategies);
  const auto models = load_models(o.models, cfg, strategies);
  const EvalReport report = evaluate(cfg, strategies, o.drops, parse_precoder(o.precoder), o.seed, models);
  write_eval_csvs(o.out, report);
  write_eval_summary(std::cout, report);
  std::size_t flagged = 0;
  for (const auto& r : report.results) flagged += r.flagged;
  return over_threshold(flagged, o.drops * report.results.size(), cfg.max_degenerate_fraction) ? kExitDegenerate
                                                                                                : kExitOk;
}

int run_bench(const Options& o) {
  PipelineConfig cfg = load_pipeline_config(o.config);
  cfg.workers = 1;
  std::vector<std::string> algorithms;
  std::stringstream ss(o.algorithms);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) algorithms.push_back(item);
  }
  std::map<ModelKind, LearnedAllocator> models;
  if (!o.models.empty()) {
    for (const auto& a : algorithms) {
      if (a == "ddnn" || a == "ddnn-si" || a == "cdnn") {
        const ModelKind kind = parse_model_kind(a);
        models.emplace(kind, load_allocator(o.models, kind, cfg));
      }
    }
  }
  const auto rows = bench(cfg, algorithms, o.repeats, o.seed, models);
  if (!o.out.empty()) {
    std::ofstream out(o.out);
    if (!out) throw DataError("cannot write '" + o.out + "'");
    write_bench_csv(out, rows);
  }
  write_bench_csv(std::cout, rows);
  return kExitOk;
}

int run_inspect(const Options& o) {
  std::ifstream in(o.file, std::ios::binary);
  if (!in) throw DataError("cannot open '" + o.file + "'");
  char magic[4] = {};
  in.read(magic, 4);
  in.seekg(0);
  const std::string tag(magic, 4);
  if (tag == "CFDS") {
    const Dataset ds = read_dataset(in);
    std::size_t unconverged = 0;
    for (const auto& s : ds.samples) unconverged += s.converged ? 0 : 1;
    std::cout << "dataset\nobjective " << to_string(ds.header.objective) << "\nprecoder "
              << to_string(ds.header.precoder) << "\nmaster_seed " << ds.header.master_seed << "\nfull_params "
              << ds.header.full_params << "\nsamples " << ds.samples.size() << "\nunconverged " << unconverged
              << "\n" << ds.header.config_text;
  } else if (tag == "CFNN") {
    const MlpModel m = read_model(in);
    std::cout << "model\nkind " << to_string(m.kind) << "\nid " << m.id << "\nnum_ues " << m.num_ues
              << "\ncluster_size " << m.cluster_size << "\nparameters " << m.parameter_count() << "\nlayers";
    for (const auto& layer : m.layers) std::cout << ' ' << layer.weight.cols() << "->" << layer.weight.rows();
    std::cout << '\n';
  } else if (tag == "CFSE") {
    const SEParameters p = read_se_parameters(in);
    std::cout << "se_parameters\nnum_ues " << p.num_ues << "\nnum_aps " << p.num_aps << "\nrealizations "
              << p.n_real << "\ndigest " << std::hex << digest(p) << std::dec << '\n';
  } else {
    throw DataError("unrecognized file type in '" + o.file + "'");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-free massive MIMO downlink power allocation"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("generate", "Solve training drops with WMMSE and write a dataset");
  gen->add_option("--config", o.config, "Configuration file")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", o.seed, "Master seed");
  gen->add_option("--samples", o.samples, "Number of samples")->required();
  gen->add_option("--objective", o.objective)->check(CLI::IsMember({"sumse", "pf"}));
  gen->add_option("--precoder", o.precoder)->check(CLI::IsMember({"mr", "rzf"}));
  gen->add_option("--out", o.out, "Dataset path")->required();
  gen->add_flag("--resume", o.resume, "Keep samples already present in --out");
  gen->add_flag("--digest-only", o.digest_only, "Store only a digest of each drop's SE statistics");

  auto* trn = app.add_subcommand("train", "Train one learned allocator kind");
  trn->add_option("--config", o.config)->required()->check(CLI::ExistingFile);
  trn->add_option("--data", o.data, "Dataset path")->required()->check(CLI::ExistingFile);
  trn->add_option("--kind", o.kind)->check(CLI::IsMember({"ddnn", "ddnn-si", "cdnn"}));
  trn->add_option("--out", o.out, "Model directory")->required();

  auto* ev = app.add_subcommand("evaluate", "Compare strategies on fresh test drops");
  ev->add_option("--config", o.config)->required()->check(CLI::ExistingFile);
  ev->add_option("--seed", o.seed);
  ev->add_option("--strategies", o.strategies, "Comma-separated strategy list");
  ev->add_option("--drops", o.drops);
  ev->add_option("--precoder", o.precoder)->check(CLI::IsMember({"mr", "rzf"}));
  ev->add_option("--models", o.models, "Model directory");
  ev->add_option("--out", o.out, "Output directory")->required();

  auto* bn = app.add_subcommand("bench", "Time one allocation per algorithm");
  bn->add_option("--config", o.config)->required()->check(CLI::ExistingFile);
  bn->add_option("--seed", o.seed);
  bn->add_option("--strategies", o.algorithms, "Comma-separated algorithm list");
  bn->add_option("--repeats", o.repeats)->check(CLI::PositiveNumber);
  bn->add_option("--models", o.models, "Model directory");
  bn->add_option("--out", o.out, "CSV path");

  auto* ins = app.add_subcommand("inspect", "Print the header of a dataset, model or statistics file");
  ins->add_option("file", o.file)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return run_generate(o);
    if (trn->parsed()) return run_train(o);
    if (ev->parsed()) return run_evaluate(o);
    if (bn->parsed()) return run_bench(o);
    return run_inspect(o);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
