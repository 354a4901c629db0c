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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sculpt/ansatz.hpp"
#include "sculpt/downstream.hpp"
#include "sculpt/sculpture.hpp"

namespace sculpt {

struct RunConfig {
  AnsatzSpec ansatz;
  MetaTrainConfig meta;
  DownstreamConfig downstream;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  std::vector<double> lambda_grid;  // 0, 0.05, ..., 1
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::string dataset = "data/diabetes.csv";
  std::string out_dir = "out";
  std::string checkpoint;  // empty: <out_dir>/sculpture.ckpt.json
  /// Standard-normal meta-training inputs instead of the dataset.
  bool synthetic_meta_inputs = false;
  int synthetic_count = 512;

  RunConfig();
  /// Throws DataError naming the first invalid field.
  void validate() const;
  std::string checkpoint_path() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Applies "section.key=value" to `j`. The value is parsed as JSON when it
/// is valid JSON and taken as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// FNV-1a of the canonical JSON dump, 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace sculpt
