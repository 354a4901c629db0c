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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sculpt/config.hpp"
#include "sculpt/io.hpp"

namespace sculpt {
namespace {

namespace fs = std::filesystem;

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

SweepTable fake_sweep(int epochs) {
  SweepTable t;
  t.grid = {0.0, 0.5};
  t.seeds = {0, 1};
  for (double l : t.grid)
    for (std::uint64_t s : t.seeds) {
      LambdaRunRecord r;
      r.lambda = l;
      r.seed = s;
      r.initial_test_accuracy = 0.5;
      r.initial_train_loss = 0.7;
      for (int e = 1; e <= epochs; ++e) {
        r.epochs.push_back({e, 1.0 / e + l + 0.01 * static_cast<double>(s), 0.6 + 0.01 * e,
                            0.1 * e, 0.2 * e});
      }
      t.runs.push_back(r);
    }
  return t;
}

TEST(Io, NumbersRoundTrip) {
  std::mt19937_64 rng(91);
  std::normal_distribution<double> nd(0, 1e3);
  for (int i = 0; i < 200; ++i) {
    const double v = nd(rng);
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.25), "0.25");
  EXPECT_EQ(format_number(3), "3");
}

TEST(Io, MetaTraceHasOneRowPerStep) {
  std::vector<MetaTraceRow> trace(3);
  for (int i = 0; i < 3; ++i) {
    trace[i].step = i + 1;
    trace[i].summary.log_kappa = 1.5 - 0.1 * i;
    trace[i].grad_norm = 2.0;
  }
  const auto rows = parse_csv(meta_trace_csv(trace));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0][0], "step");
  EXPECT_EQ(rows[0][1], "log_kappa");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].size(), rows[0].size());
  EXPECT_EQ(std::stod(rows[2][1]), 1.4);
}

TEST(Io, HeatmapDimensionsAndSeedMeans) {
  const auto table = fake_sweep(4);
  const auto rows = parse_csv(heatmap_csv(table, HeatmapQuantity::kLoss));
  ASSERT_EQ(rows.size(), 5u);  // header plus E rows
  EXPECT_EQ(rows[0].size(), 3u);  // epoch plus |grid| columns
  EXPECT_EQ(rows[0][0], "epoch");
  EXPECT_DOUBLE_EQ(std::stod(rows[2][2]), 0.5 + 0.5 + 0.005);
}

TEST(Io, FinalRowsEqualLastHeatmapRow) {
  const auto table = fake_sweep(3);
  const auto finals = parse_csv(final_vs_lambda_csv(table));
  ASSERT_EQ(finals.size(), 5u);
  EXPECT_EQ(finals[0][0], "lambda");
  EXPECT_EQ(finals[0][4], "final_grad_norm");
  const auto loss = parse_csv(heatmap_csv(table, HeatmapQuantity::kLoss)).back();
  const auto acc = parse_csv(heatmap_csv(table, HeatmapQuantity::kAccuracy)).back();
  const auto grad = parse_csv(heatmap_csv(table, HeatmapQuantity::kGradNorm)).back();
  for (std::size_t g = 0; g < 2; ++g) {
    double l = 0, a = 0, n = 0;
    for (std::size_t s = 0; s < 2; ++s) {
      const auto& row = finals[1 + g * 2 + s];
      l += std::stod(row[2]) / 2;
      a += std::stod(row[3]) / 2;
      n += std::stod(row[4]) / 2;
    }
    EXPECT_DOUBLE_EQ(std::stod(loss[1 + g]), l);
    EXPECT_DOUBLE_EQ(std::stod(acc[1 + g]), a);
    EXPECT_DOUBLE_EQ(std::stod(grad[1 + g]), n);
  }
}

TEST(Io, ZeroEpochFinalsUseInitialValues) {
  const auto finals = parse_csv(final_vs_lambda_csv(fake_sweep(0)));
  EXPECT_EQ(std::stod(finals[1][2]), 0.7);
  EXPECT_EQ(std::stod(finals[1][3]), 0.5);
}

TEST(Io, DiagnoseTables) {
  std::vector<DiagnoseRow> rows(2);
  rows[0].index = 7;
  rows[0].theta = Eigen::VectorXd::Constant(3, 1.0);
  rows[1].index = 9;
  rows[1].theta = Eigen::VectorXd::Constant(3, 2.0);
  const auto lk = parse_csv(logkappa_csv(rows));
  ASSERT_EQ(lk.size(), 3u);
  EXPECT_EQ(lk[2][0], "9");
  const auto th = parse_csv(theta_marginals_csv(rows));
  ASSERT_EQ(th[0].size(), 4u);
  EXPECT_EQ(th[0][3], "theta_2");
  EXPECT_EQ(th[2][3], "2");
}

TEST(Io, MetricTables) {
  MetricTensor g{Eigen::Matrix2d::Identity() * 0.25, {{0}, {1}}, MetricSource::kBlockDiag};
  const auto rows = parse_csv(metric_csv(g));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"row", "col", "value"}));
  EXPECT_EQ(rows[1], (std::vector<std::string>{"0", "0", "0.25"}));
  EXPECT_EQ(rows[2], (std::vector<std::string>{"0", "1", "0"}));
  const auto j = metric_json(g);
  EXPECT_EQ(j["dim"], 2);
  EXPECT_EQ(j["source"], "block_diag");
}

TEST(Io, SidecarNamesConfigHash) {
  const fs::path dir = fs::temp_directory_path() / "sculpt_test_io";
  fs::create_directories(dir);
  const auto out = (dir / "trace.csv").string();
  write_text_file(out, "a\n");
  RunConfig c;
  write_sidecar(out, c, {0, 1}, "meta-train");
  nlohmann::json j;
  std::ifstream(out + ".meta.json") >> j;
  EXPECT_EQ(j["config_hash"], config_hash(c));
  EXPECT_EQ(j["seeds"], nlohmann::json::array({0, 1}));
  EXPECT_EQ(j["command"], "meta-train");
  EXPECT_THROW(write_text_file((dir / "missing" / "x.csv").string(), ""), DataError);
}

TEST(Config, DefaultsValidateAndRoundTrip) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.lambda_grid.size(), 21u);
  EXPECT_DOUBLE_EQ(c.lambda_grid.back(), 1.0);
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
}

TEST(Config, OverridesAndUnknownKeys) {
  auto j = to_json(RunConfig{});
  apply_override(j, "meta.steps=7");
  apply_override(j, "meta.block_partition=layer");
  apply_override(j, "downstream.lambda_grid=[0,0.5]");
  const auto c = config_from_json(j);
  EXPECT_EQ(c.meta.steps, 7);
  EXPECT_EQ(c.meta.loss.partition, BlockPartition::kLayer);
  EXPECT_EQ(c.lambda_grid, (std::vector<double>{0, 0.5}));
  EXPECT_NE(config_hash(c), config_hash(RunConfig{}));

  auto bad = to_json(RunConfig{});
  bad["meta"]["stepz"] = 3;
  EXPECT_THROW(config_from_json(bad), DataError);
  auto invalid = to_json(RunConfig{});
  invalid["meta"]["lr"] = -1;
  try {
    config_from_json(invalid);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("meta.lr"), std::string::npos);
  }
  EXPECT_THROW(apply_override(j, "no_equals_sign"), DataError);
}

TEST(Config, PartialFileKeepsDefaults) {
  const fs::path dir = fs::temp_directory_path() / "sculpt_test_io";
  fs::create_directories(dir);
  const auto path = (dir / "partial.json").string();
  std::ofstream(path) << R"({"ansatz": {"num_layers": 2}})";
  const auto c = load_config(path);
  EXPECT_EQ(c.ansatz.num_layers, 2);
  EXPECT_EQ(c.ansatz.num_qubits, 8);
  std::ofstream(path) << "{";
  EXPECT_THROW(load_config(path), DataError);
  EXPECT_THROW(load_config((dir / "absent.json").string()), DataError);
}

}  // namespace
}  // namespace sculpt
