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

#include "sculpt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "sculpt/errors.hpp"
#include "sculpt/hash.hpp"

namespace sculpt {
namespace {

using json = nlohmann::json;

void reject_unknown(const json& section, const std::set<std::string>& known,
                    const std::string& where) {
  if (!section.is_object()) throw DataError("config: '" + where + "' must be an object");
  for (const auto& item : section.items()) {
    if (!known.contains(item.key())) {
      throw DataError("config: unknown key '" + where + "." + item.key() + "'");
    }
  }
}

template <typename T>
void read(const json& section, const char* key, T& out) {
  if (section.contains(key)) out = section.at(key).get<T>();
}

}  // namespace

RunConfig::RunConfig() {
  for (int i = 0; i <= 20; ++i) lambda_grid.push_back(i / 20.0);
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& field) {
    if (!ok) throw DataError("config: invalid value for '" + field + "'");
  };
  require(ansatz.num_qubits >= 1 && ansatz.num_qubits <= 20, "ansatz.num_qubits");
  require(ansatz.num_layers >= 1, "ansatz.num_layers");
  require(ansatz.feature_dim >= 1, "ansatz.feature_dim");
  require(std::isfinite(ansatz.encoding_rz_scale), "ansatz.encoding_rz_scale");
  require(meta.hidden_dim >= 1, "meta.hidden_dim");
  require(meta.batch_size >= 1, "meta.batch_size");
  require(meta.steps >= 0, "meta.steps");
  require(meta.optimizer.lr > 0, "meta.lr");
  require(meta.optimizer.weight_decay >= 0, "meta.weight_decay");
  require(meta.init_sigma > 0, "meta.init_sigma");
  require(meta.loss.epsilon_filter > 0, "meta.epsilon_filter");
  require(meta.loss.epsilon_degenerate > 0, "meta.epsilon_degenerate");
  require(meta.fd_step > 0, "meta.fd_step");
  require(meta.max_degenerate_steps >= 0, "meta.max_degenerate_steps");
  require(downstream.epochs >= 0, "downstream.epochs");
  require(downstream.batch_size >= 1, "downstream.batch_size");
  require(downstream.optimizer.lr > 0, "downstream.lr");
  require(downstream.optimizer.weight_decay >= 0, "downstream.weight_decay");
  require(downstream.clip_norm > 0, "downstream.clip_norm");
  require(downstream.init_sigma > 0, "downstream.init_sigma");
  require(test_fraction > 0 && test_fraction < 1, "downstream.test_fraction");
  require(!lambda_grid.empty(), "downstream.lambda_grid");
  for (double l : lambda_grid) require(l >= 0 && l <= 1, "downstream.lambda_grid");
  require(!seeds.empty(), "downstream.seeds");
  require(synthetic_count >= 1, "meta.synthetic_count");
}

std::string RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? out_dir + "/sculpture.ckpt.json" : checkpoint;
}

json to_json(const RunConfig& c) {
  return {
      {"ansatz",
       {{"num_qubits", c.ansatz.num_qubits},
        {"num_layers", c.ansatz.num_layers},
        {"feature_dim", c.ansatz.feature_dim},
        {"encoding_rz_scale", c.ansatz.encoding_rz_scale}}},
      {"meta",
       {{"hidden_dim", c.meta.hidden_dim},
        {"batch_size", c.meta.batch_size},
        {"steps", c.meta.steps},
        {"lr", c.meta.optimizer.lr},
        {"beta1", c.meta.optimizer.beta1},
        {"beta2", c.meta.optimizer.beta2},
        {"adam_eps", c.meta.optimizer.eps},
        {"weight_decay", c.meta.optimizer.weight_decay},
        {"init_sigma", c.meta.init_sigma},
        {"epsilon_filter", c.meta.loss.epsilon_filter},
        {"epsilon_degenerate", c.meta.loss.epsilon_degenerate},
        {"block_partition", to_string(c.meta.loss.partition)},
        {"fd_step", c.meta.fd_step},
        {"max_degenerate_steps", c.meta.max_degenerate_steps},
        {"synthetic_inputs", c.synthetic_meta_inputs},
        {"synthetic_count", c.synthetic_count}}},
      {"downstream",
       {{"epochs", c.downstream.epochs},
        {"batch_size", c.downstream.batch_size},
        {"lr", c.downstream.optimizer.lr},
        {"beta1", c.downstream.optimizer.beta1},
        {"beta2", c.downstream.optimizer.beta2},
        {"adam_eps", c.downstream.optimizer.eps},
        {"weight_decay", c.downstream.optimizer.weight_decay},
        {"clip_norm", c.downstream.clip_norm},
        {"init_sigma", c.downstream.init_sigma},
        {"test_fraction", c.test_fraction},
        {"split_seed", c.split_seed},
        {"lambda_grid", c.lambda_grid},
        {"seeds", c.seeds}}},
      {"paths",
       {{"dataset", c.dataset}, {"out_dir", c.out_dir}, {"checkpoint", c.checkpoint}}},
  };
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    reject_unknown(j, {"ansatz", "meta", "downstream", "paths"}, "config");
    if (j.contains("ansatz")) {
      const json& a = j.at("ansatz");
      reject_unknown(a, {"num_qubits", "num_layers", "feature_dim", "encoding_rz_scale"},
                     "ansatz");
      read(a, "num_qubits", c.ansatz.num_qubits);
      read(a, "num_layers", c.ansatz.num_layers);
      read(a, "feature_dim", c.ansatz.feature_dim);
      read(a, "encoding_rz_scale", c.ansatz.encoding_rz_scale);
    }
    if (j.contains("meta")) {
      const json& m = j.at("meta");
      reject_unknown(m,
                     {"hidden_dim", "batch_size", "steps", "lr", "beta1", "beta2",
                      "adam_eps", "weight_decay", "init_sigma", "epsilon_filter",
                      "epsilon_degenerate", "block_partition", "fd_step",
                      "max_degenerate_steps", "synthetic_inputs", "synthetic_count"},
                     "meta");
      read(m, "hidden_dim", c.meta.hidden_dim);
      read(m, "batch_size", c.meta.batch_size);
      read(m, "steps", c.meta.steps);
      read(m, "lr", c.meta.optimizer.lr);
      read(m, "beta1", c.meta.optimizer.beta1);
      read(m, "beta2", c.meta.optimizer.beta2);
      read(m, "adam_eps", c.meta.optimizer.eps);
      read(m, "weight_decay", c.meta.optimizer.weight_decay);
      read(m, "init_sigma", c.meta.init_sigma);
      read(m, "epsilon_filter", c.meta.loss.epsilon_filter);
      read(m, "epsilon_degenerate", c.meta.loss.epsilon_degenerate);
      if (m.contains("block_partition")) {
        c.meta.loss.partition =
            parse_block_partition(m.at("block_partition").get<std::string>());
      }
      read(m, "fd_step", c.meta.fd_step);
      read(m, "max_degenerate_steps", c.meta.max_degenerate_steps);
      read(m, "synthetic_inputs", c.synthetic_meta_inputs);
      read(m, "synthetic_count", c.synthetic_count);
    }
    if (j.contains("downstream")) {
      const json& d = j.at("downstream");
      reject_unknown(d,
                     {"epochs", "batch_size", "lr", "beta1", "beta2", "adam_eps",
                      "weight_decay", "clip_norm", "init_sigma", "test_fraction",
                      "split_seed", "lambda_grid", "seeds"},
                     "downstream");
      read(d, "epochs", c.downstream.epochs);
      read(d, "batch_size", c.downstream.batch_size);
      read(d, "lr", c.downstream.optimizer.lr);
      read(d, "beta1", c.downstream.optimizer.beta1);
      read(d, "beta2", c.downstream.optimizer.beta2);
      read(d, "adam_eps", c.downstream.optimizer.eps);
      read(d, "weight_decay", c.downstream.optimizer.weight_decay);
      read(d, "clip_norm", c.downstream.clip_norm);
      read(d, "init_sigma", c.downstream.init_sigma);
      read(d, "test_fraction", c.test_fraction);
      read(d, "split_seed", c.split_seed);
      read(d, "lambda_grid", c.lambda_grid);
      read(d, "seeds", c.seeds);
    }
    if (j.contains("paths")) {
      const json& p = j.at("paths");
      reject_unknown(p, {"dataset", "out_dir", "checkpoint"}, "paths");
      read(p, "dataset", c.dataset);
      read(p, "out_dir", c.out_dir);
      read(p, "checkpoint", c.checkpoint);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config '" + path + "' not found or unreadable");
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw DataError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw DataError("override key '" + key + "' is malformed");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part)) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

std::string config_hash(const RunConfig& config) {
  return fmt::format("{:016x}", fnv1a(to_json(config).dump()));
}

}  // namespace sculpt
