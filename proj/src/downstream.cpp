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

#include "sculpt/downstream.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sculpt/errors.hpp"
#include "sculpt/parallel.hpp"

namespace sculpt {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, int line_no, const std::string& column) {
  double v = 0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw DataError("line " + std::to_string(line_no) + ": column '" + column +
                    "' has non-numeric value '" + cell + "'");
  }
  return v;
}

std::vector<int> positions_of_params(const GateSequence& seq, int p) {
  std::vector<int> pos(p, -1);
  for (int g = 0; g < static_cast<int>(seq.gates.size()); ++g) {
    if (const auto& k = seq.gates[g].param_index) pos[*k] = g;
  }
  return pos;
}

ParameterVector sample_theta(const ParameterVector& theta_task, const Sample& s,
                             double lambda) {
  if (s.theta_meta.size() == 0 || lambda == 0.0) return theta_task;
  return compose_parameters(theta_task, s.theta_meta, lambda);
}

Eigen::VectorXd expectations_at(const AnsatzSpec& spec, const FeatureVector& x,
                                const ParameterVector& theta) {
  return pauli_z_expectations(circuit_state(spec, x, theta));
}

/// Per-sample loss and gradients; dtheta via the parameter-shift rule with
/// the state before each parameterized gate cached from one forward pass.
struct SampleGradient {
  double loss = 0;
  Eigen::VectorXd theta;
  Eigen::VectorXd expectations;
  Eigen::Vector2d dlogits;
};

SampleGradient sample_gradient(const ParameterVector& theta_task,
                               const ReadoutParams& readout, const Sample& sample,
                               double lambda, const AnsatzSpec& spec) {
  const ParameterVector theta = sample_theta(theta_task, sample, lambda);
  const GateSequence seq = build_circuit(spec, sample.x, theta);
  const int p = spec.num_params();
  const std::vector<int> pos = positions_of_params(seq, p);
  const auto gates = std::span<const GateOp>(seq.gates);

  std::vector<StateVector> before(p);
  StateVector s(spec.num_qubits);
  for (const auto& g : seq.gates) {
    if (g.param_index) before[*g.param_index] = s;
    apply_gate_inplace(s, g);
  }

  SampleGradient out;
  out.expectations = pauli_z_expectations(s);
  const Eigen::Vector2d logits = readout.w * out.expectations + readout.b;
  out.loss = cross_entropy(logits, sample.label);
  out.dlogits = softmax(logits);
  out.dlogits(sample.label) -= 1.0;
  const Eigen::VectorXd dexp = readout.w.transpose() * out.dlogits;

  out.theta.resize(p);
  for (int k = 0; k < p; ++k) {
    const auto suffix = gates.subspan(pos[k] + 1);
    Eigen::VectorXd shifted[2];
    for (int side = 0; side < 2; ++side) {
      GateOp g = seq.gates[pos[k]];
      *g.angle += side == 0 ? kHalfPi : -kHalfPi;
      StateVector t = before[k];
      apply_gate_inplace(t, g);
      run_gates_inplace(t, suffix);
      shifted[side] = pauli_z_expectations(t);
    }
    out.theta(k) = 0.5 * dexp.dot(shifted[0] - shifted[1]);
  }
  return out;
}

nlohmann::json to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string lambda_tag(double lambda) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(4);
  s << std::fixed << lambda;
  return s.str();
}

}  // namespace

RawTable load_diabetes_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("dataset '" + path + "' not found or unreadable");
  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset '" + path + "' is empty");
  const std::vector<std::string> header = split_csv_line(line);
  const auto label_it = std::find(header.begin(), header.end(), "Outcome");
  if (label_it == header.end()) {
    throw DataError("dataset '" + path + "': missing 'Outcome' column");
  }
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());

  RawTable table;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) table.feature_names.push_back(header[c]);
  }
  if (table.feature_names.empty()) {
    throw DataError("dataset '" + path + "': no feature columns");
  }

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " columns, found " +
                      std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_number(cells[c], line_no, header[c]);
      if (c == label_col) {
        if (v != 0.0 && v != 1.0) {
          throw DataError("line " + std::to_string(line_no) + ": invalid label '" +
                          cells[c] + "' (expected 0 or 1)");
        }
        table.labels.push_back(static_cast<int>(v));
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("dataset '" + path + "' has no data rows");

  table.features.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(table.feature_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) table.features(i, j) = rows[i][j];
  }
  return table;
}

std::vector<FeatureVector> Dataset::rows(std::span<const int> indices) const {
  std::vector<FeatureVector> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(row(i));
  return out;
}

Dataset prepare_dataset(const RawTable& raw, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ContractViolation("prepare_dataset: test_fraction must lie in (0, 1)");
  }
  const auto m = static_cast<int>(raw.labels.size());
  if (m == 0 || raw.features.rows() != m) throw DataError("prepare_dataset: empty table");

  Dataset ds;
  ds.labels = raw.labels;
  std::mt19937_64 rng(seed);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<int> members;
    for (int i = 0; i < m; ++i) {
      if (raw.labels[i] == cls) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(members.size())));
    if (n_test == 0 || n_test == members.size()) {
      throw DataError("prepare_dataset: class " + std::to_string(cls) +
                      " would be absent from the train or test split");
    }
    ds.test.insert(ds.test.end(), members.begin(), members.begin() + n_test);
    ds.train.insert(ds.train.end(), members.begin() + n_test, members.end());
  }
  std::sort(ds.train.begin(), ds.train.end());
  std::sort(ds.test.begin(), ds.test.end());

  const auto d = raw.features.cols();
  Eigen::MatrixXd train(ds.train.size(), d);
  for (std::size_t i = 0; i < ds.train.size(); ++i) train.row(i) = raw.features.row(ds.train[i]);
  ds.mean = train.colwise().mean().transpose();
  ds.stddev =
      ((train.rowwise() - ds.mean.transpose()).array().square().colwise().mean().sqrt())
          .transpose();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(ds.stddev(j) > 0)) {
      throw DataError("prepare_dataset: feature '" + raw.feature_names[j] +
                      "' is constant on the train split");
    }
  }
  ds.features = (raw.features.rowwise() - ds.mean.transpose()).array().rowwise() /
                ds.stddev.transpose().array();
  return ds;
}

ParameterVector MetaSource::theta_meta(const FeatureVector& x, Eigen::Index p) const {
  if (params == nullptr) return {};
  if (params->output_dim() != p) {
    throw DimensionError("meta-model emits " + std::to_string(params->output_dim()) +
                         " angles, circuit has " + std::to_string(p));
  }
  return meta_forward(*params, x).theta;
}

ClassifierOutput classifier_forward(const ParameterVector& theta_task,
                                    const ReadoutParams& readout,
                                    const FeatureVector& x, double lambda,
                                    const MetaSource& meta, const AnsatzSpec& spec) {
  Sample s{x, lambda == 0.0 ? ParameterVector() : meta.theta_meta(x, theta_task.size()), 0};
  ClassifierOutput out;
  out.expectations = expectations_at(spec, x, sample_theta(theta_task, s, lambda));
  out.logits = readout.w * out.expectations + readout.b;
  return out;
}

Eigen::Vector2d softmax(const Eigen::Vector2d& logits) {
  const Eigen::Vector2d e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

double cross_entropy(const Eigen::Vector2d& logits, int label) {
  if (!logits.allFinite()) throw NumericalError("cross_entropy: non-finite logits");
  if (label != 0 && label != 1) throw ContractViolation("cross_entropy: label must be 0 or 1");
  // softplus of the margin against the other class
  const double d = logits(1 - label) - logits(label);
  return std::max(d, 0.0) + std::log1p(std::exp(-std::abs(d)));
}

BatchGradient batch_gradient(const ParameterVector& theta_task,
                             const ReadoutParams& readout,
                             std::span<const Sample> batch, double lambda,
                             const AnsatzSpec& spec) {
  if (batch.empty()) throw ContractViolation("batch_gradient: empty batch");
  std::vector<SampleGradient> parts(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    parts[i] = sample_gradient(theta_task, readout, batch[i], lambda, spec);
  });
  BatchGradient g;
  g.theta_task = Eigen::VectorXd::Zero(theta_task.size());
  g.readout_w = Eigen::MatrixXd::Zero(readout.w.rows(), readout.w.cols());
  for (const auto& part : parts) {
    g.loss += part.loss;
    g.theta_task += part.theta;
    g.readout_w += part.dlogits * part.expectations.transpose();
    g.readout_b += part.dlogits;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  g.loss *= inv;
  g.theta_task *= inv;
  g.readout_w *= inv;
  g.readout_b *= inv;
  return g;
}

Eigen::VectorXd grad_theta_task(const ParameterVector& theta_task,
                                const ReadoutParams& readout,
                                std::span<const Sample> batch, double lambda,
                                const AnsatzSpec& spec) {
  return batch_gradient(theta_task, readout, batch, lambda, spec).theta_task;
}

ReadoutGradient grad_readout(const ReadoutParams& readout,
                             std::span<const Eigen::VectorXd> expectations,
                             std::span<const int> labels) {
  if (expectations.empty() || expectations.size() != labels.size()) {
    throw ContractViolation("grad_readout: batch sizes differ or are empty");
  }
  ReadoutGradient g{Eigen::MatrixXd::Zero(readout.w.rows(), readout.w.cols()),
                    Eigen::Vector2d::Zero()};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Eigen::Vector2d d = softmax(readout.w * expectations[i] + readout.b);
    d(labels[i]) -= 1.0;
    g.w += d * expectations[i].transpose();
    g.b += d;
  }
  g.w /= static_cast<double>(labels.size());
  g.b /= static_cast<double>(labels.size());
  return g;
}

Eigen::VectorXd clip_gradient(const Eigen::VectorXd& g, double max_norm) {
  if (!(max_norm > 0)) throw ContractViolation("clip_gradient: max_norm must be > 0");
  const double n = g.norm();
  return n > max_norm ? Eigen::VectorXd(g * (max_norm / n)) : g;
}

std::vector<Sample> make_samples(const Dataset& dataset, std::span<const int> indices,
                                 const MetaSource& meta, const AnsatzSpec& spec) {
  if (dataset.dim() != spec.feature_dim) {
    throw DimensionError("dataset has " + std::to_string(dataset.dim()) +
                         " features, ansatz expects " + std::to_string(spec.feature_dim));
  }
  std::vector<Sample> out(indices.size());
  parallel_for(indices.size(), [&](std::size_t i) {
    const FeatureVector x = dataset.row(indices[i]);
    out[i] = Sample{x, meta.theta_meta(x, spec.num_params()), dataset.labels[indices[i]]};
  });
  return out;
}

double accuracy(const ParameterVector& theta_task, const ReadoutParams& readout,
                std::span<const Sample> samples, double lambda, const AnsatzSpec& spec) {
  if (samples.empty()) return 0.0;
  std::vector<char> hit(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const Eigen::VectorXd o =
        expectations_at(spec, samples[i].x, sample_theta(theta_task, samples[i], lambda));
    const Eigen::Vector2d z = readout.w * o + readout.b;
    const int pred = z(1) > z(0) ? 1 : 0;
    hit[i] = pred == samples[i].label;
  });
  return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) /
         static_cast<double>(samples.size());
}

double mean_loss(const ParameterVector& theta_task, const ReadoutParams& readout,
                 std::span<const Sample> samples, double lambda, const AnsatzSpec& spec) {
  if (samples.empty()) return 0.0;
  std::vector<double> loss(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const Eigen::VectorXd o =
        expectations_at(spec, samples[i].x, sample_theta(theta_task, samples[i], lambda));
    loss[i] = cross_entropy(readout.w * o + readout.b, samples[i].label);
  });
  double sum = 0;
  for (double l : loss) sum += l;
  return sum / static_cast<double>(samples.size());
}

LambdaRunRecord train_one_lambda(const DownstreamConfig& config, const Dataset& dataset,
                                 double lambda, const MetaSource& meta,
                                 const AnsatzSpec& spec, std::uint64_t seed,
                                 const std::string& checkpoint_path) {
  if (config.batch_size < 1) throw ContractViolation("train_one_lambda: batch_size must be >= 1");
  const int p = spec.num_params();
  const int n = spec.num_qubits;
  const MetaSource active = lambda == 0.0 ? MetaSource{} : meta;
  const std::vector<Sample> train = make_samples(dataset, dataset.train, active, spec);
  const std::vector<Sample> test = make_samples(dataset, dataset.test, active, spec);

  LambdaRunRecord rec;
  rec.lambda = lambda;
  rec.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, config.init_sigma);
  rec.theta_task.resize(p);
  for (int k = 0; k < p; ++k) rec.theta_task(k) = normal(rng);
  rec.readout.w.resize(2, n);
  for (Eigen::Index j = 0; j < rec.readout.w.cols(); ++j) {
    for (Eigen::Index i = 0; i < 2; ++i) rec.readout.w(i, j) = normal(rng);
  }
  rec.readout.b.setZero();

  AdamWState theta_opt = AdamWState::init(p, config.optimizer);
  AdamWState readout_opt = AdamWState::init(2 * n + 2, config.optimizer);
  rec.initial_test_accuracy = accuracy(rec.theta_task, rec.readout, test, lambda, spec);
  rec.initial_train_loss = mean_loss(rec.theta_task, rec.readout, train, lambda, spec);

  std::vector<int> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::vector<Sample> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRow row;
    row.epoch = epoch;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(train[order[i]]);
      const BatchGradient g = batch_gradient(rec.theta_task, rec.readout, batch, lambda, spec);
      const Eigen::VectorXd clipped = clip_gradient(g.theta_task, config.clip_norm);
      row.theta_grad_norm_raw = g.theta_task.norm();
      row.theta_grad_norm = clipped.norm();
      adamw_step(theta_opt, rec.theta_task, clipped);
      Eigen::VectorXd flat(2 * n + 2);
      flat << rec.readout.w.reshaped(), rec.readout.b;
      Eigen::VectorXd grad(2 * n + 2);
      grad << g.readout_w.reshaped(), g.readout_b;
      adamw_step(readout_opt, flat, grad);
      rec.readout.w.reshaped() = flat.head(2 * n);
      rec.readout.b = flat.tail(2);
    }
    if (!rec.theta_task.allFinite() || !rec.readout.w.allFinite()) {
      throw NumericalError("downstream training diverged at epoch " + std::to_string(epoch));
    }
    row.train_loss = mean_loss(rec.theta_task, rec.readout, train, lambda, spec);
    row.test_accuracy = accuracy(rec.theta_task, rec.readout, test, lambda, spec);
    rec.epochs.push_back(row);
  }

  if (!checkpoint_path.empty()) {
    nlohmann::json j;
    j["format"] = "sculpt-classifier-checkpoint";
    j["version"] = kCheckpointVersion;
    j["lambda"] = lambda;
    j["seed"] = seed;
    j["epochs"] = config.epochs;
    j["theta_task"] = std::vector<double>(rec.theta_task.begin(), rec.theta_task.end());
    j["readout_w"] = to_json(rec.readout.w);
    j["readout_b"] = {rec.readout.b(0), rec.readout.b(1)};
    std::ofstream out(checkpoint_path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint '" + checkpoint_path + "'");
    out << j.dump(1) << '\n';
    rec.checkpoint = checkpoint_path;
  }
  return rec;
}

SweepTable lambda_sweep(const DownstreamConfig& config, const Dataset& dataset,
                        const std::vector<double>& grid, const MetaSource& meta,
                        const AnsatzSpec& spec, const std::vector<std::uint64_t>& seeds,
                        const std::string& checkpoint_dir) {
  if (grid.empty()) throw ContractViolation("lambda_sweep: empty grid");
  if (seeds.empty()) throw ContractViolation("lambda_sweep: no seeds");
  SweepTable table{grid, seeds, {}};
  for (double lambda : grid) {
    for (std::uint64_t seed : seeds) {
      std::string path;
      if (!checkpoint_dir.empty()) {
        path = checkpoint_dir + "/run_l" + lambda_tag(lambda) + "_s" +
               std::to_string(seed) + ".json";
      }
      table.runs.push_back(train_one_lambda(config, dataset, lambda, meta, spec, seed, path));
    }
  }
  return table;
}

}  // namespace sculpt
