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

/// CSV and JSON artifacts. Numbers are written in the shortest form that
/// round-trips, with '.' as decimal separator and LF line endings.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sculpt/config.hpp"
#include "sculpt/downstream.hpp"
#include "sculpt/fsmetric.hpp"
#include "sculpt/sculpture.hpp"
#include "sculpt/spectral.hpp"

namespace sculpt {

std::string format_number(double v);

/// Writes `contents` byte for byte; throws DataError on failure.
void write_text_file(const std::string& path, const std::string& contents);

std::string meta_trace_csv(const std::vector<MetaTraceRow>& trace);

/// lambda, seed, final_loss, final_accuracy, final_grad_norm, then
/// final_grad_norm_raw and initial_accuracy.
std::string final_vs_lambda_csv(const SweepTable& table);

enum class HeatmapQuantity { kLoss, kAccuracy, kGradNorm };
std::string to_string(HeatmapQuantity q);

/// Epoch rows by lambda columns, each cell the mean over seeds.
std::string heatmap_csv(const SweepTable& table, HeatmapQuantity q);

struct DiagnoseRow {
  int index = 0;  // row of the input in the dataset
  SpectralSummary summary;
  ParameterVector theta;
};

std::string logkappa_csv(const std::vector<DiagnoseRow>& rows);
/// One row per input: index, theta_0 ... theta_{p-1}.
std::string theta_marginals_csv(const std::vector<DiagnoseRow>& rows);

/// One (row, col, value) line per entry, zeros included.
std::string metric_csv(const MetricTensor& g);
nlohmann::json metric_json(const MetricTensor& g);

/// Writes `<output>.meta.json`: tool version, config hash, seeds and the
/// full config.
void write_sidecar(const std::string& output_path, const RunConfig& config,
                   const std::vector<std::uint64_t>& seeds,
                   const std::string& command);

}  // namespace sculpt
