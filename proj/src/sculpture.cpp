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

#include "sculpt/sculpture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>

#include <nlohmann/json.hpp>

#include "sculpt/hash.hpp"
#include "sculpt/parallel.hpp"

namespace sculpt {
namespace {

using json = nlohmann::json;

constexpr double kPi = std::numbers::pi;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_shapes(const MetaModelParams& p) {
  if (p.b1.size() != p.w1.rows() || p.w2.cols() != p.w1.rows() ||
      p.b2.size() != p.w2.rows()) {
    throw DimensionError("meta model: inconsistent weight shapes");
  }
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows,
                                 Eigen::Index cols, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw DataError(std::string("checkpoint: '") + name + "' has wrong row count");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError(std::string("checkpoint: '") + name + "' has wrong column count");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[c].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index size, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
    throw DataError(std::string("checkpoint: '") + name + "' has wrong length");
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = j[i].get<double>();
  return v;
}

/// Batch-averaged rotation-group blocks and their eigenvalues, kept so that
/// finite-difference probes can recompute only the groups they affect.
struct GroupBatch {
  std::vector<RotationGroupPass> passes;  // one per batch input
  std::vector<Eigen::MatrixXd> mean_blocks;
  std::vector<Eigen::VectorXd> eigenvalues;
};

/// Averages blocks from `first` on, in batch order, and decomposes them.
void refresh_from(GroupBatch& gb, int first) {
  const auto groups = static_cast<int>(gb.passes.front().blocks.size());
  const double b = static_cast<double>(gb.passes.size());
  for (int g = first; g < groups; ++g) {
    Eigen::MatrixXd sum = gb.passes.front().blocks[g];
    for (std::size_t j = 1; j < gb.passes.size(); ++j) sum += gb.passes[j].blocks[g];
    gb.mean_blocks[g] = sum / b;
    gb.eigenvalues[g] = jacobi_eigh(gb.mean_blocks[g]).eigenvalues;
  }
}

SpectralSummary group_summary(const GroupBatch& gb, const MetaLossOptions& opts) {
  Eigen::Index total = 0;
  for (const auto& e : gb.eigenvalues) total += e.size();
  EigenDecomposition eig;
  eig.eigenvalues.resize(total);
  Eigen::Index o = 0;
  for (const auto& e : gb.eigenvalues) {
    eig.eigenvalues.segment(o, e.size()) = e;
    o += e.size();
  }
  std::stable_sort(eig.eigenvalues.begin(), eig.eigenvalues.end(), std::greater<>());
  return spectral_summary(eig, opts.epsilon_filter, opts.epsilon_degenerate);
}

GroupBatch group_batch(const ParameterVector& theta, std::span<const FeatureVector> batch,
                       const AnsatzSpec& spec) {
  GroupBatch gb;
  gb.passes.resize(batch.size());
  parallel_for(batch.size(), [&](std::size_t j) {
    gb.passes[j] = rotation_group_pass(spec, batch[j], theta);
  });
  gb.mean_blocks.resize(gb.passes.front().blocks.size());
  gb.eigenvalues.resize(gb.passes.front().blocks.size());
  refresh_from(gb, 0);
  return gb;
}

}  // namespace

MetaModelParams MetaModelParams::zeros(int input_dim, int hidden_dim,
                                       int output_dim) {
  MetaModelParams p;
  p.w1 = Eigen::MatrixXd::Zero(hidden_dim, input_dim);
  p.b1 = Eigen::VectorXd::Zero(hidden_dim);
  p.w2 = Eigen::MatrixXd::Zero(output_dim, hidden_dim);
  p.b2 = Eigen::VectorXd::Zero(output_dim);
  return p;
}

MetaModelParams MetaModelParams::gaussian(int input_dim, int hidden_dim,
                                          int output_dim, double sigma,
                                          std::mt19937_64& rng) {
  MetaModelParams p = zeros(input_dim, hidden_dim, output_dim);
  std::normal_distribution<double> normal(0.0, sigma);
  Eigen::VectorXd flat(p.size());
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = normal(rng);
  p.assign(flat);
  return p;
}

Eigen::VectorXd MetaModelParams::flatten() const {
  Eigen::VectorXd flat(size());
  Eigen::Index o = 0;
  flat.segment(o, w1.size()) = w1.reshaped();
  o += w1.size();
  flat.segment(o, b1.size()) = b1;
  o += b1.size();
  flat.segment(o, w2.size()) = w2.reshaped();
  o += w2.size();
  flat.segment(o, b2.size()) = b2;
  return flat;
}

void MetaModelParams::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != size()) throw DimensionError("meta model: flat size mismatch");
  Eigen::Index o = 0;
  w1.reshaped() = flat.segment(o, w1.size());
  o += w1.size();
  b1 = flat.segment(o, b1.size());
  o += b1.size();
  w2.reshaped() = flat.segment(o, w2.size());
  o += w2.size();
  b2 = flat.segment(o, b2.size());
}

bool MetaModelParams::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
}

std::uint64_t fingerprint(const MetaModelParams& p) {
  std::uint64_t h = kFnvOffset;
  h = fnv1a(p.w1.data(), sizeof(double) * p.w1.size(), h);
  h = fnv1a(p.b1.data(), sizeof(double) * p.b1.size(), h);
  h = fnv1a(p.w2.data(), sizeof(double) * p.w2.size(), h);
  h = fnv1a(p.b2.data(), sizeof(double) * p.b2.size(), h);
  const int act = static_cast<int>(p.activation);
  return fnv1a(&act, sizeof(act), h);
}

MetaForward meta_forward(const MetaModelParams& params, const FeatureVector& x) {
  check_shapes(params);
  if (x.size() != params.input_dim()) {
    throw DimensionError("meta_forward: input has " + std::to_string(x.size()) +
                         " features, model expects " +
                         std::to_string(params.input_dim()));
  }
  MetaForward out;
  auto& c = out.cache;
  c.x = x;
  const Eigen::VectorXd pre = params.w1 * x + params.b1;
  c.hidden = params.activation == Activation::kTanh ? Eigen::VectorXd(pre.array().tanh())
                                                    : pre;
  c.logits = params.w2 * c.hidden + params.b2;
  c.theta.resize(c.logits.size());
  // Keep the range open even where sigmoid saturates in floating point.
  const double lo = std::nextafter(0.0, 1.0);
  const double hi = std::nextafter(kPi, 0.0);
  for (Eigen::Index i = 0; i < c.logits.size(); ++i) {
    c.theta(i) = std::clamp(kPi * sigmoid(c.logits(i)), lo, hi);
  }
  c.params_fingerprint = fingerprint(params);
  out.theta = c.theta;
  return out;
}

MetaModelParams meta_backward(const MetaModelParams& params,
                              const MetaForwardCache& cache,
                              const Eigen::VectorXd& dloss_dtheta) {
  if (cache.params_fingerprint != fingerprint(params)) {
    throw ContractViolation("meta_backward: cache is stale (weights changed since forward)");
  }
  if (dloss_dtheta.size() != params.output_dim()) {
    throw DimensionError("meta_backward: gradient length mismatch");
  }
  MetaModelParams g = MetaModelParams::zeros(params.input_dim(), params.hidden_dim(),
                                             params.output_dim());
  g.activation = params.activation;
  Eigen::VectorXd dz(cache.logits.size());
  for (Eigen::Index i = 0; i < dz.size(); ++i) {
    const double s = sigmoid(cache.logits(i));
    dz(i) = dloss_dtheta(i) * kPi * s * (1.0 - s);
  }
  g.w2 = dz * cache.hidden.transpose();
  g.b2 = dz;
  Eigen::VectorXd dpre = params.w2.transpose() * dz;
  if (params.activation == Activation::kTanh) {
    dpre.array() *= 1.0 - cache.hidden.array().square();
  }
  g.w1 = dpre * cache.x.transpose();
  g.b1 = dpre;
  return g;
}

MetaLossResult loss_at_theta(const ParameterVector& theta,
                             std::span<const FeatureVector> batch,
                             const AnsatzSpec& spec, const MetaLossOptions& opts) {
  if (batch.empty()) throw DimensionError("loss_at_theta: empty batch");
  MetaLossResult r;
  if (opts.partition == BlockPartition::kRotationGroup) {
    r.summary = group_summary(group_batch(theta, batch, spec), opts);
  } else {
    const MetricTensor g = fs_metric_batch_avg(spec, batch, theta, opts.partition);
    r.summary = spectral_summary(eigh_symmetric(g), opts.epsilon_filter,
                                 opts.epsilon_degenerate);
  }
  r.loss = r.summary.log_kappa;
  r.theta = theta;
  return r;
}

MetaLossResult meta_loss(const MetaModelParams& params, const FeatureVector& x_rep,
                         std::span<const FeatureVector> batch,
                         const AnsatzSpec& spec, const MetaLossOptions& opts) {
  if (batch.empty()) throw DimensionError("meta_loss: empty batch");
  return loss_at_theta(meta_forward(params, x_rep).theta, batch, spec, opts);
}

ThetaGradient meta_loss_grad_theta(const ParameterVector& theta,
                                   std::span<const FeatureVector> batch,
                                   const AnsatzSpec& spec,
                                   const MetaLossOptions& opts, double h) {
  if (!(h > 0)) throw ContractViolation("meta_loss_grad_theta: h must be > 0");
  const auto p = theta.size();
  // Probe 2k is theta + h e_k, probe 2k+1 is theta - h e_k.
  std::vector<std::optional<double>> probe(2 * p);
  if (opts.partition == BlockPartition::kRotationGroup) {
    // A probe on a parameter of group g leaves every group up to g unchanged.
    const GroupBatch base = group_batch(theta, batch, spec);
    parallel_for(probe.size(), [&](std::size_t i) {
      ParameterVector t = theta;
      const auto k = static_cast<int>(i / 2);
      t(k) += (i % 2 == 0) ? h : -h;
      const ParamSlot slot = param_slot(spec, k);
      const int group = 3 * slot.layer + slot.rot;
      GroupBatch gb = base;
      for (std::size_t j = 0; j < batch.size(); ++j) {
        gb.passes[j] = rotation_group_pass_from(spec, t, base.passes[j], group);
      }
      refresh_from(gb, group + 1);
      try {
        probe[i] = group_summary(gb, opts).log_kappa;
      } catch (const DegenerateSpectrumError&) {
        probe[i].reset();
      }
    });
  } else {
    parallel_for(probe.size(), [&](std::size_t i) {
      ParameterVector t = theta;
      t(i / 2) += (i % 2 == 0) ? h : -h;
      try {
        probe[i] = loss_at_theta(t, batch, spec, opts).loss;
      } catch (const DegenerateSpectrumError&) {
        probe[i].reset();
      }
    });
  }

  ThetaGradient out;
  out.grad = Eigen::VectorXd::Zero(p);
  std::optional<double> center;
  for (Eigen::Index k = 0; k < p; ++k) {
    const auto& plus = probe[2 * k];
    const auto& minus = probe[2 * k + 1];
    if (plus && minus) {
      out.grad(k) = (*plus - *minus) / (2.0 * h);
      continue;
    }
    out.one_sided.push_back(static_cast<int>(k));
    if (!plus && !minus) continue;
    if (!center) center = loss_at_theta(theta, batch, spec, opts).loss;
    out.grad(k) = plus ? (*plus - *center) / h : (*center - *minus) / h;
  }
  return out;
}

AdamWState AdamWState::init(Eigen::Index size, const AdamWHyper& hyper) {
  AdamWState s;
  s.first_moment = Eigen::VectorXd::Zero(size);
  s.second_moment = Eigen::VectorXd::Zero(size);
  s.hyper = hyper;
  return s;
}

void adamw_step(AdamWState& state, Eigen::Ref<Eigen::VectorXd> params,
                const Eigen::VectorXd& grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw DimensionError("adamw_step: shape mismatch");
  }
  const AdamWHyper& h = state.hyper;
  ++state.step_count;
  params *= 1.0 - h.lr * h.weight_decay;
  state.first_moment = h.beta1 * state.first_moment + (1.0 - h.beta1) * grads;
  state.second_moment =
      h.beta2 * state.second_moment + (1.0 - h.beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step_count));
  params.array() -= h.lr * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + h.eps);
}

std::vector<int> sample_indices(int n, int k, std::mt19937_64& rng) {
  if (n <= 0) throw DimensionError("sample_indices: empty population");
  std::vector<int> out;
  out.reserve(k);
  if (k > n) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int i = 0; i < k; ++i) out.push_back(pick(rng));
    return out;
  }
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
    out.push_back(pool[i]);
  }
  return out;
}

MetaTrainResult meta_train(const MetaTrainConfig& config, const AnsatzSpec& spec,
                           std::span<const FeatureVector> dataset,
                           std::uint64_t seed,
                           const std::function<void(const MetaTraceRow&)>& on_step) {
  if (dataset.empty()) throw DataError("meta_train: empty dataset");
  if (config.batch_size < 1) throw ContractViolation("meta_train: batch_size must be >= 1");
  spec.validate();
  const int n = static_cast<int>(dataset.size());

  MetaTrainResult result;
  result.seed = seed;
  std::mt19937_64 rng(seed);
  result.params = MetaModelParams::gaussian(spec.feature_dim, config.hidden_dim,
                                            spec.num_params(), config.init_sigma, rng);
  result.optimizer = AdamWState::init(result.params.size(), config.optimizer);

  int degenerate_run = 0;
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int step = 1; step <= config.steps; ++step) {
    const FeatureVector& x_rep = dataset[pick(rng)];
    std::vector<FeatureVector> batch;
    for (int idx : sample_indices(n, config.batch_size, rng)) batch.push_back(dataset[idx]);

    const MetaForward fwd = meta_forward(result.params, x_rep);
    MetaLossResult loss;
    try {
      loss = loss_at_theta(fwd.theta, batch, spec, config.loss);
    } catch (const DegenerateSpectrumError& e) {
      throw BarrenPlateauError("meta-training step " + std::to_string(step) + ": " +
                               e.what());
    }
    const ThetaGradient tg =
        meta_loss_grad_theta(fwd.theta, batch, spec, config.loss, config.fd_step);
    const Eigen::VectorXd grads =
        meta_backward(result.params, fwd.cache, tg.grad).flatten();

    MetaTraceRow row;
    row.step = step;
    row.summary = loss.summary;
    row.grad_norm = grads.norm();
    row.theta_grad_norm = tg.grad.norm();
    row.one_sided_components = static_cast<int>(tg.one_sided.size());

    Eigen::VectorXd flat = result.params.flatten();
    adamw_step(result.optimizer, flat, grads);
    result.params.assign(flat);
    if (!result.params.all_finite()) {
      throw NumericalError("meta-training step " + std::to_string(step) +
                           ": non-finite meta-model weights");
    }
    result.trace.push_back(row);
    if (on_step) on_step(row);

    degenerate_run = loss.summary.degenerate ? degenerate_run + 1 : 0;
    if (degenerate_run > config.max_degenerate_steps) {
      throw BarrenPlateauError(
          "meta-training aborted: metric spectrum degenerate for " +
          std::to_string(degenerate_run) +
          " consecutive steps (more than half the eigenvalues below " +
          std::to_string(config.loss.epsilon_degenerate) + "); likely barren plateau");
    }
  }
  return result;
}

void save_checkpoint(const std::string& path, const MetaModelParams& params,
                     const AdamWState& optimizer, std::uint64_t seed) {
  if (!params.all_finite()) throw NumericalError("save_checkpoint: non-finite weights");
  json j;
  j["format"] = "sculpt-meta-checkpoint";
  j["version"] = kCheckpointVersion;
  j["input_dim"] = params.input_dim();
  j["hidden_dim"] = params.hidden_dim();
  j["output_dim"] = params.output_dim();
  j["activation"] = params.activation == Activation::kTanh ? "tanh" : "identity";
  j["seed"] = seed;
  j["step"] = optimizer.step_count;
  j["w1"] = matrix_to_json(params.w1);
  j["b1"] = vector_to_json(params.b1);
  j["w2"] = matrix_to_json(params.w2);
  j["b2"] = vector_to_json(params.b2);
  j["optimizer"] = {
      {"lr", optimizer.hyper.lr},
      {"beta1", optimizer.hyper.beta1},
      {"beta2", optimizer.hyper.beta2},
      {"eps", optimizer.hyper.eps},
      {"weight_decay", optimizer.hyper.weight_decay},
      {"step", optimizer.step_count},
      {"first_moment", vector_to_json(optimizer.first_moment)},
      {"second_moment", vector_to_json(optimizer.second_moment)},
  };
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  out << j.dump(1) << '\n';
  if (!out) throw DataError("failed writing checkpoint '" + path + "'");
}

LoadedCheckpoint load_checkpoint(const std::string& path, int input_dim,
                                 int output_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint '" + path + "' not found or unreadable");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("checkpoint '" + path + "' is corrupt: " + e.what());
  }
  try {
    if (j.value("format", "") != "sculpt-meta-checkpoint") {
      throw DataError("checkpoint '" + path + "': not a meta-model checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw DataError("checkpoint '" + path + "': version " + std::to_string(version) +
                      " unsupported (expected " + std::to_string(kCheckpointVersion) + ")");
    }
    const int d = j.at("input_dim").get<int>();
    const int h = j.at("hidden_dim").get<int>();
    const int p = j.at("output_dim").get<int>();
    if ((input_dim >= 0 && d != input_dim) || (output_dim >= 0 && p != output_dim)) {
      throw DataError("checkpoint '" + path + "': shape (d=" + std::to_string(d) +
                      ", p=" + std::to_string(p) + ") does not match config (d=" +
                      std::to_string(input_dim) + ", p=" + std::to_string(output_dim) + ")");
    }
    LoadedCheckpoint out;
    out.params.w1 = matrix_from_json(j.at("w1"), h, d, "w1");
    out.params.b1 = vector_from_json(j.at("b1"), h, "b1");
    out.params.w2 = matrix_from_json(j.at("w2"), p, h, "w2");
    out.params.b2 = vector_from_json(j.at("b2"), p, "b2");
    const std::string act = j.at("activation").get<std::string>();
    if (act != "tanh" && act != "identity") {
      throw DataError("checkpoint '" + path + "': unknown activation '" + act + "'");
    }
    out.params.activation = act == "tanh" ? Activation::kTanh : Activation::kIdentity;
    out.seed = j.at("seed").get<std::uint64_t>();
    const json& o = j.at("optimizer");
    AdamWHyper hyper{o.at("lr").get<double>(), o.at("beta1").get<double>(),
                     o.at("beta2").get<double>(), o.at("eps").get<double>(),
                     o.at("weight_decay").get<double>()};
    out.optimizer = AdamWState::init(out.params.size(), hyper);
    out.optimizer.step_count = o.at("step").get<long>();
    out.optimizer.first_moment =
        vector_from_json(o.at("first_moment"), out.params.size(), "first_moment");
    out.optimizer.second_moment =
        vector_from_json(o.at("second_moment"), out.params.size(), "second_moment");
    return out;
  } catch (const json::exception& e) {
    throw DataError("checkpoint '" + path + "' is malformed: " + e.what());
  }
}

}  // namespace sculpt
