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

#include "sculpt/io.hpp"

#include <fstream>

#include <fmt/format.h>

#include "sculpt/errors.hpp"

namespace sculpt {
namespace {

double epoch_value(const LambdaRunRecord& run, std::size_t e, HeatmapQuantity q) {
  const EpochRow& row = run.epochs[e];
  switch (q) {
    case HeatmapQuantity::kLoss: return row.train_loss;
    case HeatmapQuantity::kAccuracy: return row.test_accuracy;
    case HeatmapQuantity::kGradNorm: return row.theta_grad_norm;
  }
  return 0;
}

}  // namespace

std::string format_number(double v) { return fmt::format("{}", v); }

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::string meta_trace_csv(const std::vector<MetaTraceRow>& trace) {
  std::string s =
      "step,log_kappa,kappa,lambda_min,lambda_max,lambda_min_raw,entropy,"
      "effective_dim,log_volume,trace,pac_surrogate,degenerate,num_retained,"
      "num_filtered,grad_norm,theta_grad_norm,one_sided_components\n";
  for (const auto& r : trace) {
    const auto& m = r.summary;
    s += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.step,
                     m.log_kappa, m.kappa, m.lambda_min, m.lambda_max, m.lambda_min_raw,
                     m.entropy, m.effective_dim, m.log_volume, m.trace, m.pac_surrogate,
                     m.degenerate ? 1 : 0, m.num_retained, m.num_filtered, r.grad_norm,
                     r.theta_grad_norm, r.one_sided_components);
  }
  return s;
}

std::string final_vs_lambda_csv(const SweepTable& table) {
  std::string s =
      "lambda,seed,final_loss,final_accuracy,final_grad_norm,final_grad_norm_raw,"
      "initial_accuracy\n";
  for (const auto& run : table.runs) {
    double loss = run.initial_train_loss;
    double acc = run.initial_test_accuracy;
    double grad = 0;
    double grad_raw = 0;
    if (!run.epochs.empty()) {
      const EpochRow& last = run.epochs.back();
      loss = last.train_loss;
      acc = last.test_accuracy;
      grad = last.theta_grad_norm;
      grad_raw = last.theta_grad_norm_raw;
    }
    s += fmt::format("{},{},{},{},{},{},{}\n", run.lambda, run.seed, loss, acc, grad,
                     grad_raw, run.initial_test_accuracy);
  }
  return s;
}

std::string to_string(HeatmapQuantity q) {
  switch (q) {
    case HeatmapQuantity::kLoss: return "loss";
    case HeatmapQuantity::kAccuracy: return "accuracy";
    case HeatmapQuantity::kGradNorm: return "gradnorm";
  }
  return "unknown";
}

std::string heatmap_csv(const SweepTable& table, HeatmapQuantity q) {
  std::string s = "epoch";
  for (double l : table.grid) s += fmt::format(",{}", l);
  s += '\n';
  const std::size_t epochs = table.runs.empty() ? 0 : table.runs.front().epochs.size();
  for (std::size_t e = 0; e < epochs; ++e) {
    s += fmt::format("{}", e + 1);
    for (std::size_t g = 0; g < table.grid.size(); ++g) {
      double sum = 0;
      for (std::size_t k = 0; k < table.seeds.size(); ++k) {
        sum += epoch_value(table.at(g, k), e, q);
      }
      s += fmt::format(",{}", sum / static_cast<double>(table.seeds.size()));
    }
    s += '\n';
  }
  return s;
}

std::string logkappa_csv(const std::vector<DiagnoseRow>& rows) {
  std::string s =
      "index,log_kappa,kappa,lambda_min,lambda_max,entropy,effective_dim,degenerate\n";
  for (const auto& r : rows) {
    const auto& m = r.summary;
    s += fmt::format("{},{},{},{},{},{},{},{}\n", r.index, m.log_kappa, m.kappa,
                     m.lambda_min, m.lambda_max, m.entropy, m.effective_dim,
                     m.degenerate ? 1 : 0);
  }
  return s;
}

std::string theta_marginals_csv(const std::vector<DiagnoseRow>& rows) {
  std::string s = "index";
  const Eigen::Index p = rows.empty() ? 0 : rows.front().theta.size();
  for (Eigen::Index k = 0; k < p; ++k) s += fmt::format(",theta_{}", k);
  s += '\n';
  for (const auto& r : rows) {
    s += fmt::format("{}", r.index);
    for (Eigen::Index k = 0; k < r.theta.size(); ++k) s += fmt::format(",{}", r.theta(k));
    s += '\n';
  }
  return s;
}

std::string metric_csv(const MetricTensor& g) {
  std::string s = "row,col,value\n";
  for (Eigen::Index i = 0; i < g.dim(); ++i) {
    for (Eigen::Index j = 0; j < g.dim(); ++j) {
      s += fmt::format("{},{},{}\n", i, j, g.entries(i, j));
    }
  }
  return s;
}

nlohmann::json metric_json(const MetricTensor& g) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < g.dim(); ++i) {
    std::vector<double> row(g.entries.row(i).begin(), g.entries.row(i).end());
    rows.push_back(row);
  }
  return {{"source", to_string(g.source)}, {"dim", g.dim()}, {"blocks", g.blocks},
          {"entries", rows}};
}

void write_sidecar(const std::string& output_path, const RunConfig& config,
                   const std::vector<std::uint64_t>& seeds, const std::string& command) {
  const nlohmann::json meta = {
      {"file", output_path.substr(output_path.find_last_of('/') + 1)},
      {"command", command},
      {"version", SCULPT_VERSION},
      {"config_hash", config_hash(config)},
      {"seeds", seeds},
      {"config", to_json(config)},
  };
  write_text_file(output_path + ".meta.json", meta.dump(2) + "\n");
}

}  // namespace sculpt
