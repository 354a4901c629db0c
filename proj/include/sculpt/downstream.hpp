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

/// Hybrid classifier: composite-parameter circuit, Pauli-Z readout through a
/// two-logit linear layer, cross-entropy, parameter-shift gradients.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sculpt/ansatz.hpp"
#include "sculpt/sculpture.hpp"

namespace sculpt {

struct RawTable {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd features;  // M x d, raw units
  std::vector<int> labels;
};

/// Header row with numeric feature columns and an `Outcome` column in {0, 1}.
/// Parse errors name the offending line.
RawTable load_diabetes_csv(const std::string& path);

struct Dataset {
  Eigen::MatrixXd features;  // M x d, standardized with train statistics
  std::vector<int> labels;
  std::vector<int> train;
  std::vector<int> test;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  int dim() const { return static_cast<int>(features.cols()); }
  FeatureVector row(int i) const { return features.row(i).transpose(); }
  std::vector<FeatureVector> rows(std::span<const int> indices) const;
};

/// Stratified shuffle split, then z-scoring (population std) fit on train.
Dataset prepare_dataset(const RawTable& raw, double test_fraction = 0.2,
                        std::uint64_t seed = 0);

struct ReadoutParams {
  Eigen::MatrixXd w;  // 2 x N
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
};

/// The frozen meta-model seen by the classifier. With no params the meta
/// term is absent, which is what lambda = 0 means anyway.
struct MetaSource {
  const MetaModelParams* params = nullptr;
  ParameterVector theta_meta(const FeatureVector& x, Eigen::Index p) const;
};

struct ClassifierOutput {
  Eigen::VectorXd expectations;  // <Z_q>, length N
  Eigen::Vector2d logits;
};

ClassifierOutput classifier_forward(const ParameterVector& theta_task,
                                    const ReadoutParams& readout,
                                    const FeatureVector& x, double lambda,
                                    const MetaSource& meta, const AnsatzSpec& spec);

/// -log softmax(logits)[label], max-logit stabilized.
double cross_entropy(const Eigen::Vector2d& logits, int label);
Eigen::Vector2d softmax(const Eigen::Vector2d& logits);

/// One labelled input with its precomputed meta angles.
struct Sample {
  FeatureVector x;
  ParameterVector theta_meta;  // empty when there is no meta term
  int label = 0;
};

struct BatchGradient {
  double loss = 0;              // batch-mean cross-entropy
  Eigen::VectorXd theta_task;   // batch-mean dL/dtheta_task
  Eigen::MatrixXd readout_w;    // batch-mean dL/dW
  Eigen::Vector2d readout_b = Eigen::Vector2d::Zero();
};

/// Parameter-shift gradients of the batch-mean loss. Each theta component
/// uses (<Z>(theta_k + pi/2) - <Z>(theta_k - pi/2)) / 2, chained through the
/// readout and the cross-entropy.
BatchGradient batch_gradient(const ParameterVector& theta_task,
                             const ReadoutParams& readout,
                             std::span<const Sample> batch, double lambda,
                             const AnsatzSpec& spec);

Eigen::VectorXd grad_theta_task(const ParameterVector& theta_task,
                                const ReadoutParams& readout,
                                std::span<const Sample> batch, double lambda,
                                const AnsatzSpec& spec);

/// Exact softmax/cross-entropy gradients of the linear readout given the
/// cached expectations.
struct ReadoutGradient {
  Eigen::MatrixXd w;
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
};
ReadoutGradient grad_readout(const ReadoutParams& readout,
                             std::span<const Eigen::VectorXd> expectations,
                             std::span<const int> labels);

/// Rescales g to norm max_norm when it is longer, identity otherwise.
Eigen::VectorXd clip_gradient(const Eigen::VectorXd& g, double max_norm);

struct DownstreamConfig {
  int epochs = 20;
  int batch_size = 16;
  AdamWHyper optimizer{0.05, 0.9, 0.999, 1e-8, 0.01};
  double clip_norm = 1.0;
  double init_sigma = 0.1;
};

struct EpochRow {
  int epoch = 0;
  double train_loss = 0;      // full-pass mean loss on the train split
  double test_accuracy = 0;
  double theta_grad_norm = 0;          // clipped, last minibatch of the epoch
  double theta_grad_norm_raw = 0;      // before clipping
};

struct LambdaRunRecord {
  double lambda = 0;
  std::uint64_t seed = 0;
  double initial_test_accuracy = 0;
  double initial_train_loss = 0;
  std::vector<EpochRow> epochs;
  ParameterVector theta_task;
  ReadoutParams readout;
  std::string checkpoint;  // path written, empty if none
};

/// Minibatch AdamW on (theta_task, readout) with clipped theta gradients.
/// Writes a JSON checkpoint of the final weights when `checkpoint_path` is set.
LambdaRunRecord train_one_lambda(const DownstreamConfig& config,
                                 const Dataset& dataset, double lambda,
                                 const MetaSource& meta, const AnsatzSpec& spec,
                                 std::uint64_t seed,
                                 const std::string& checkpoint_path = {});

double accuracy(const ParameterVector& theta_task, const ReadoutParams& readout,
                std::span<const Sample> samples, double lambda,
                const AnsatzSpec& spec);
double mean_loss(const ParameterVector& theta_task, const ReadoutParams& readout,
                 std::span<const Sample> samples, double lambda,
                 const AnsatzSpec& spec);

std::vector<Sample> make_samples(const Dataset& dataset, std::span<const int> indices,
                                 const MetaSource& meta, const AnsatzSpec& spec);

struct SweepTable {
  std::vector<double> grid;
  std::vector<std::uint64_t> seeds;
  std::vector<LambdaRunRecord> runs;  // grid-major: runs[g * seeds + s]

  const LambdaRunRecord& at(std::size_t g, std::size_t s) const {
    return runs[g * seeds.size() + s];
  }
};

/// One run per (lambda, seed). Checkpoints go to
/// `checkpoint_dir/run_l{lambda}_s{seed}.json` when a directory is given.
SweepTable lambda_sweep(const DownstreamConfig& config, const Dataset& dataset,
                        const std::vector<double>& grid, const MetaSource& meta,
                        const AnsatzSpec& spec, const std::vector<std::uint64_t>& seeds,
                        const std::string& checkpoint_dir = {});

}  // namespace sculpt
