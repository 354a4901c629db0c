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

/// Sculpture: a shared tanh encoder with one sigmoid head per circuit
/// parameter, theta(x) = pi * sigmoid(W2 tanh(W1 x + b1) + b2), meta-trained
/// to minimize log kappa of the batch-averaged block-diagonal metric.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sculpt/ansatz.hpp"
#include "sculpt/fsmetric.hpp"
#include "sculpt/spectral.hpp"

namespace sculpt {

enum class Activation { kTanh, kIdentity };

struct MetaModelParams {
  Eigen::MatrixXd w1;  // hidden x d
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // p x hidden
  Eigen::VectorXd b2;  // p
  Activation activation = Activation::kTanh;

  static MetaModelParams zeros(int input_dim, int hidden_dim, int output_dim);
  /// Every entry drawn from N(0, sigma^2), in the order w1, b1, w2, b2
  /// (column-major within each matrix).
  static MetaModelParams gaussian(int input_dim, int hidden_dim, int output_dim,
                                  double sigma, std::mt19937_64& rng);

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  int output_dim() const { return static_cast<int>(w2.rows()); }
  Eigen::Index size() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  Eigen::VectorXd flatten() const;
  /// Inverse of flatten() for the shapes of `*this`.
  void assign(const Eigen::VectorXd& flat);
  bool all_finite() const;
};

/// FNV-1a over the raw bytes of every weight; used to detect stale caches.
std::uint64_t fingerprint(const MetaModelParams& params);

struct MetaForwardCache {
  FeatureVector x;
  Eigen::VectorXd hidden;  // activation(W1 x + b1)
  Eigen::VectorXd logits;  // W2 hidden + b2
  ParameterVector theta;
  std::uint64_t params_fingerprint = 0;
};

struct MetaForward {
  ParameterVector theta;
  MetaForwardCache cache;
};

MetaForward meta_forward(const MetaModelParams& params, const FeatureVector& x);

/// Exact chain rule through pi*sigmoid, the heads and the encoder. Throws
/// ContractViolation if `cache` was produced with different weights.
MetaModelParams meta_backward(const MetaModelParams& params,
                              const MetaForwardCache& cache,
                              const Eigen::VectorXd& dloss_dtheta);

struct MetaLossOptions {
  double epsilon_filter = 1e-10;
  double epsilon_degenerate = 1e-6;
  BlockPartition partition = BlockPartition::kRotationGroup;
};

struct MetaLossResult {
  double loss = 0;
  SpectralSummary summary;
  ParameterVector theta;
};

/// log kappa of the batch-averaged block-diagonal metric at a fixed theta.
MetaLossResult loss_at_theta(const ParameterVector& theta,
                             std::span<const FeatureVector> batch,
                             const AnsatzSpec& spec, const MetaLossOptions& opts);

/// theta_rep = meta_forward(params, x_rep), then loss_at_theta(theta_rep, batch).
MetaLossResult meta_loss(const MetaModelParams& params, const FeatureVector& x_rep,
                         std::span<const FeatureVector> batch,
                         const AnsatzSpec& spec, const MetaLossOptions& opts);

struct ThetaGradient {
  Eigen::VectorXd grad;
  /// Components where one probe hit a fully degenerate spectrum and a
  /// one-sided difference was used (or 0 when both probes failed).
  std::vector<int> one_sided;
};

/// Central differences of loss_at_theta, component k from theta +- h e_k.
ThetaGradient meta_loss_grad_theta(const ParameterVector& theta,
                                   std::span<const FeatureVector> batch,
                                   const AnsatzSpec& spec,
                                   const MetaLossOptions& opts, double h = 1e-4);

struct AdamWHyper {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct AdamWState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step_count = 0;
  AdamWHyper hyper;

  static AdamWState init(Eigen::Index size, const AdamWHyper& hyper);
};

/// One AdamW update: p <- p - lr*wd*p, then the bias-corrected Adam step.
void adamw_step(AdamWState& state, Eigen::Ref<Eigen::VectorXd> params,
                const Eigen::VectorXd& grads);

struct MetaTrainConfig {
  int hidden_dim = 64;
  int batch_size = 16;
  int steps = 100;
  AdamWHyper optimizer{};
  double init_sigma = 0.1;
  double fd_step = 1e-4;
  MetaLossOptions loss{};
  /// Abort once this many consecutive steps are flagged degenerate.
  int max_degenerate_steps = 10;
};

struct MetaTraceRow {
  int step = 0;
  SpectralSummary summary;
  double grad_norm = 0;
  double theta_grad_norm = 0;
  int one_sided_components = 0;
};

struct MetaTrainResult {
  MetaModelParams params;
  AdamWState optimizer;
  std::vector<MetaTraceRow> trace;
  std::uint64_t seed = 0;
};

/// Algorithm: per step sample x_rep and a batch of distinct inputs, evaluate
/// log kappa of the averaged metric at theta(x_rep), differentiate it with
/// respect to theta by central differences, backpropagate through the model
/// and take an AdamW step. Deterministic for a given (config, dataset, seed).
/// `on_step` (optional) sees every trace row as it is produced.
MetaTrainResult meta_train(const MetaTrainConfig& config, const AnsatzSpec& spec,
                           std::span<const FeatureVector> dataset,
                           std::uint64_t seed,
                           const std::function<void(const MetaTraceRow&)>& on_step = {});

/// Picks `k` distinct indices from [0, n) by a partial Fisher-Yates shuffle;
/// when k > n the draw falls back to sampling with replacement.
std::vector<int> sample_indices(int n, int k, std::mt19937_64& rng);

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const MetaModelParams& params,
                     const AdamWState& optimizer, std::uint64_t seed);

struct LoadedCheckpoint {
  MetaModelParams params;
  AdamWState optimizer;
  std::uint64_t seed = 0;
};

/// Throws DataError for missing/corrupt files, version mismatch, or shapes
/// that differ from (input_dim, output_dim) when those are non-negative.
LoadedCheckpoint load_checkpoint(const std::string& path, int input_dim = -1,
                                 int output_dim = -1);

}  // namespace sculpt
