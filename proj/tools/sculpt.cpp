// Copyright 2026 The Sculpt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sculpt/config.hpp"
#include "sculpt/downstream.hpp"
#include "sculpt/errors.hpp"
#include "sculpt/fsmetric.hpp"
#include "sculpt/io.hpp"
#include "sculpt/parallel.hpp"
#include "sculpt/sculpture.hpp"
#include "sculpt/spectral.hpp"

namespace {

using namespace sculpt;
using json = nlohmann::json;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_path, "JSON run config");
  app->add_option("--out", o.out_dir, "Output directory (overrides paths.out_dir)");
  app->add_option("--seed", o.seed, "Random seed");
  app->add_option("--threads", o.threads, "Worker threads, 0 = all cores");
  app->add_option("--set", o.overrides, "Config override section.key=value");
}

RunConfig resolve_config(const CommonOptions& o, const std::vector<std::string>& extra) {
  json j = to_json(RunConfig{});
  if (!o.config_path.empty()) {
    const RunConfig from_file = load_config(o.config_path);
    j = to_json(from_file);
  }
  for (const auto& s : o.overrides) apply_override(j, s);
  for (const auto& s : extra) apply_override(j, s);
  if (!o.out_dir.empty()) j["paths"]["out_dir"] = o.out_dir;
  RunConfig config = config_from_json(j);
  set_num_threads(o.threads);
  std::filesystem::create_directories(config.out_dir);
  return config;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    json v = json::parse(item, nullptr, false);
    if (v.is_discarded() || !v.is_number()) {
      throw DataError("'" + item + "' in list '" + text + "' is not a number");
    }
    out.push_back(v.get<double>());
  }
  if (out.empty()) throw DataError("empty list '" + text + "'");
  return out;
}

Dataset load_dataset(const RunConfig& config) {
  return prepare_dataset(load_diabetes_csv(config.dataset), config.test_fraction,
                         config.split_seed);
}

void write_with_sidecar(const std::string& path, const std::string& contents,
                        const RunConfig& config, const std::vector<std::uint64_t>& seeds,
                        const std::string& command) {
  write_text_file(path, contents);
  write_sidecar(path, config, seeds, command);
}

void print_summary(const SpectralSummary& s) {
  fmt::print(
      "log_kappa={} kappa={} lambda_min={} lambda_max={} entropy={} effective_dim={} "
      "pac_surrogate={} degenerate={}\n",
      s.log_kappa, s.kappa, s.lambda_min, s.lambda_max, s.entropy, s.effective_dim,
      s.pac_surrogate, s.degenerate ? "yes" : "no");
}

int cmd_meta_train(const CommonOptions& o, std::optional<int> steps, bool verbose) {
  std::vector<std::string> extra;
  if (steps) extra.push_back("meta.steps=" + std::to_string(*steps));
  const RunConfig config = resolve_config(o, extra);

  std::vector<FeatureVector> inputs;
  if (config.synthetic_meta_inputs) {
    std::mt19937_64 rng(o.seed ^ 0x5eedULL);
    std::normal_distribution<double> normal;
    for (int i = 0; i < config.synthetic_count; ++i) {
      FeatureVector x(config.ansatz.feature_dim);
      for (auto& v : x) v = normal(rng);
      inputs.push_back(x);
    }
  } else {
    const Dataset ds = load_dataset(config);
    if (ds.dim() != config.ansatz.feature_dim) {
      throw DataError(fmt::format("dataset has {} features, config expects {}", ds.dim(),
                                  config.ansatz.feature_dim));
    }
    inputs = ds.rows(ds.train);
  }

  std::vector<MetaTraceRow> trace;
  const std::string trace_path = config.out_dir + "/meta_trace.csv";
  const std::vector<std::uint64_t> seeds{o.seed};
  try {
    const MetaTrainResult result =
        meta_train(config.meta, config.ansatz, inputs, o.seed, [&](const MetaTraceRow& r) {
          trace.push_back(r);
          if (verbose) {
            fmt::print(stderr, "step {:4d}  log_kappa {:.4f}  grad_norm {:.4f}\n", r.step,
                       r.summary.log_kappa, r.grad_norm);
          }
        });
    write_with_sidecar(trace_path, meta_trace_csv(trace), config, seeds, "meta-train");
    save_checkpoint(config.checkpoint_path(), result.params, result.optimizer, o.seed);
    write_sidecar(config.checkpoint_path(), config, seeds, "meta-train");
  } catch (const NumericalError&) {
    write_with_sidecar(trace_path, meta_trace_csv(trace), config, seeds, "meta-train");
    throw;
  }
  if (!trace.empty()) {
    fmt::print("final step {}: ", trace.back().step);
    print_summary(trace.back().summary);
  } else {
    fmt::print("no meta-training steps; wrote untrained checkpoint\n");
  }
  return kOk;
}

int cmd_diagnose(const CommonOptions& o, const std::string& checkpoint,
                 const std::string& theta_source, int max_inputs,
                 std::optional<int> dump_metric) {
  const RunConfig config = resolve_config(o, {});
  const AnsatzSpec& spec = config.ansatz;
  const Dataset ds = load_dataset(config);
  std::vector<int> indices = ds.test;
  if (max_inputs > 0 && static_cast<std::size_t>(max_inputs) < indices.size()) {
    indices.resize(max_inputs);
  }
  const std::vector<FeatureVector> inputs = ds.rows(indices);
  const MetaLossOptions& lo = config.meta.loss;
  std::vector<DiagnoseRow> rows;
  std::optional<MetricTensor> dumped;

  if (!theta_source.empty()) {
    ParameterVector theta;
    if (theta_source == "zero") {
      theta = ParameterVector::Zero(spec.num_params());
    } else {
      const std::vector<double> values = parse_list(theta_source);
      theta = Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
    }
    if (theta.size() != spec.num_params()) {
      throw DataError(fmt::format("explicit theta has {} values, circuit has {}",
                                  theta.size(), spec.num_params()));
    }
    // One row: the batch-averaged metric over all selected inputs.
    const MetricTensor g = fs_metric_batch_avg(spec, inputs, theta, lo.partition);
    rows.push_back({-1, spectral_summary(eigh_symmetric(g), lo.epsilon_filter,
                                         lo.epsilon_degenerate),
                    theta});
    if (dump_metric) dumped = g;
  } else {
    const std::string path = checkpoint.empty() ? config.checkpoint_path() : checkpoint;
    const LoadedCheckpoint ckpt =
        load_checkpoint(path, spec.feature_dim, spec.num_params());
    rows.resize(inputs.size());
    std::vector<MetricTensor> metrics(inputs.size());
    parallel_for(inputs.size(), [&](std::size_t i) {
      const ParameterVector theta = meta_forward(ckpt.params, inputs[i]).theta;
      metrics[i] = fs_metric_block_diag(spec, inputs[i], theta, lo.partition);
      rows[i] = {indices[i],
                 spectral_summary(eigh_symmetric(metrics[i]), lo.epsilon_filter,
                                  lo.epsilon_degenerate),
                 theta};
    });
    if (dump_metric) {
      if (*dump_metric < 0 || static_cast<std::size_t>(*dump_metric) >= metrics.size()) {
        throw DataError(fmt::format("--dump-metric {} out of range (0..{})", *dump_metric,
                                    metrics.size() - 1));
      }
      dumped = metrics[*dump_metric];
    }
  }

  const std::vector<std::uint64_t> seeds{o.seed};
  write_with_sidecar(config.out_dir + "/logkappa_test.csv", logkappa_csv(rows), config,
                     seeds, "diagnose");
  write_with_sidecar(config.out_dir + "/theta_marginals.csv", theta_marginals_csv(rows),
                     config, seeds, "diagnose");
  if (dumped) {
    write_with_sidecar(config.out_dir + "/metric.csv", metric_csv(*dumped), config, seeds,
                       "diagnose");
    write_with_sidecar(config.out_dir + "/metric.json", metric_json(*dumped).dump(1) + "\n",
                       config, seeds, "diagnose");
  }

  std::vector<double> lk;
  for (const auto& r : rows) lk.push_back(r.summary.log_kappa);
  std::sort(lk.begin(), lk.end());
  const auto below = std::count_if(lk.begin(), lk.end(), [](double v) { return v < 0.25; });
  fmt::print("inputs={} median_log_kappa={} min={} max={} fraction_below_0.25={}\n",
             lk.size(), lk[lk.size() / 2], lk.front(), lk.back(),
             static_cast<double>(below) / static_cast<double>(lk.size()));
  return kOk;
}

int cmd_sweep(const CommonOptions& o, const std::string& checkpoint,
              const std::string& grid, const std::string& seed_list,
              std::optional<int> epochs) {
  std::vector<std::string> extra;
  if (!grid.empty()) extra.push_back("downstream.lambda_grid=[" + grid + "]");
  if (!seed_list.empty()) extra.push_back("downstream.seeds=[" + seed_list + "]");
  if (epochs) extra.push_back("downstream.epochs=" + std::to_string(*epochs));
  const RunConfig config = resolve_config(o, extra);
  const AnsatzSpec& spec = config.ansatz;
  const Dataset ds = load_dataset(config);
  const std::string path = checkpoint.empty() ? config.checkpoint_path() : checkpoint;
  const LoadedCheckpoint ckpt = load_checkpoint(path, spec.feature_dim, spec.num_params());
  const MetaSource meta{&ckpt.params};

  const std::string run_dir = config.out_dir + "/runs";
  std::filesystem::create_directories(run_dir);
  const SweepTable table = lambda_sweep(config.downstream, ds, config.lambda_grid, meta,
                                        spec, config.seeds, run_dir);
  write_with_sidecar(config.out_dir + "/final_vs_lambda.csv", final_vs_lambda_csv(table),
                     config, config.seeds, "sweep");
  for (auto q : {HeatmapQuantity::kLoss, HeatmapQuantity::kAccuracy,
                 HeatmapQuantity::kGradNorm}) {
    write_with_sidecar(config.out_dir + "/heatmap_" + to_string(q) + ".csv",
                       heatmap_csv(table, q), config, config.seeds, "sweep");
  }
  fmt::print("{} runs written to {}\n", table.runs.size(), config.out_dir);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fubini-Study metric conditioning for parameterized circuits"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SCULPT_VERSION);

  CommonOptions meta_opts;
  std::optional<int> steps;
  bool verbose = false;
  auto* meta = app.add_subcommand("meta-train", "Meta-train the parameter generator");
  add_common(meta, meta_opts);
  meta->add_option("--steps", steps, "Meta-training steps (overrides meta.steps)");
  meta->add_flag("-v,--verbose", verbose, "Print every step to stderr");

  CommonOptions diag_opts;
  std::string diag_ckpt;
  std::string theta_source;
  int max_inputs = 0;
  std::optional<int> dump_metric;
  auto* diag = app.add_subcommand("diagnose", "Metric spectra on held-out inputs");
  add_common(diag, diag_opts);
  diag->add_option("--checkpoint", diag_ckpt, "Meta-model checkpoint");
  diag->add_option("--theta", theta_source,
                   "Explicit theta: 'zero' or comma-separated values (skips the model)");
  diag->add_option("--inputs", max_inputs, "Use the first N test inputs, 0 = all");
  diag->add_option("--dump-metric", dump_metric,
                   "Write metric.csv/json for input number K (any K with --theta)");

  CommonOptions sweep_opts;
  std::string sweep_ckpt;
  std::string grid;
  std::string seed_list;
  std::optional<int> epochs;
  auto* sweep = app.add_subcommand("sweep", "Downstream lambda sweep");
  add_common(sweep, sweep_opts);
  sweep->add_option("--checkpoint", sweep_ckpt, "Meta-model checkpoint");
  sweep->add_option("--grid", grid, "Comma-separated lambda values");
  sweep->add_option("--seeds", seed_list, "Comma-separated run seeds");
  sweep->add_option("--epochs", epochs, "Epochs per run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*meta) return cmd_meta_train(meta_opts, steps, verbose);
    if (*diag) return cmd_diagnose(diag_opts, diag_ckpt, theta_source, max_inputs, dump_metric);
    if (*sweep) return cmd_sweep(sweep_opts, sweep_ckpt, grid, seed_list, epochs);
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kNumerical;
  } catch (const DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kData;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kData;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  }
  return kUsage;
}
