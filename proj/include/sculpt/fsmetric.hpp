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

/// Fubini-Study metric of the ansatz state with respect to the trainable
/// rotation angles:
///
///   G_ij = Re[<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>]
///        = 1/4 Cov_psi(K_i, K_j),
///
/// where K_i is the Pauli generator of rotation i conjugated by the gates
/// that follow it. Encoding gates carry no parameters and contribute no rows.

#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sculpt/ansatz.hpp"

namespace sculpt {

enum class MetricSource { kProjector, kCovariance, kBlockDiag, kBatchAvg };

/// How the block-diagonal approximation groups parameters.
///  - kRotationGroup: one block per (layer, rotation axis); its N gates act on
///    distinct qubits and commute.
///  - kLayer: one block per layer, all 3N rotations of that layer.
enum class BlockPartition { kRotationGroup, kLayer };

std::string to_string(MetricSource source);
std::string to_string(BlockPartition partition);
BlockPartition parse_block_partition(const std::string& name);

struct MetricTensor {
  Eigen::MatrixXd entries;
  /// Parameter index sets of the diagonal blocks. Empty for a dense metric.
  std::vector<std::vector<int>> blocks;
  MetricSource source = MetricSource::kProjector;

  Eigen::Index dim() const { return entries.rows(); }
  bool block_diagonal() const { return !blocks.empty(); }
};

std::vector<std::vector<int>> make_blocks(const AnsatzSpec& spec,
                                          BlockPartition partition);

/// |d_k psi> = U_post (-i/2 P_k) U_pre |0...0>, by replaying the gates after k.
StateVector derivative_state(const AnsatzSpec& spec, const FeatureVector& x,
                             const ParameterVector& theta, int k);

/// Dense metric from derivative-state overlaps.
MetricTensor fs_metric_projector(const AnsatzSpec& spec, const FeatureVector& x,
                                 const ParameterVector& theta);

/// Dense metric from generator covariances, K_i|psi> built as
/// U_post P_i U_post^dagger |psi>.
MetricTensor fs_metric_covariance(const AnsatzSpec& spec,
                                  const FeatureVector& x,
                                  const ParameterVector& theta);

/// Only entries whose parameters share a block; the rest are exactly 0.
MetricTensor fs_metric_block_diag(
    const AnsatzSpec& spec, const FeatureVector& x, const ParameterVector& theta,
    BlockPartition partition = BlockPartition::kRotationGroup);

/// Rotation-group blocks from one pass over the circuit in sublayer order
/// (within a layer all RX, then all RY, then all RZ; gates on distinct qubits
/// commute). Block g = 3 * layer + rot is 1/4 Cov(P_q) in the state entering
/// group g, so it depends only on the parameters of earlier groups.
struct RotationGroupPass {
  std::vector<StateVector> entering;    // state before group g
  std::vector<Eigen::MatrixXd> blocks;  // N x N, qubit order
};

RotationGroupPass rotation_group_pass(const AnsatzSpec& spec, const FeatureVector& x,
                                      const ParameterVector& theta);

/// Recomputes groups after `group`, starting from base.entering[group]. Valid
/// when `theta` agrees with the angles behind `base` on every group before
/// `group`; the result is then bitwise equal to a fresh pass.
RotationGroupPass rotation_group_pass_from(const AnsatzSpec& spec,
                                           const ParameterVector& theta,
                                           const RotationGroupPass& base, int group);

/// (1/B) sum_j block_diag(x_j) at a shared theta, summed in batch order.
MetricTensor fs_metric_batch_avg(
    const AnsatzSpec& spec, std::span<const FeatureVector> batch,
    const ParameterVector& theta,
    BlockPartition partition = BlockPartition::kRotationGroup);

/// |(1 - |<psi(theta)|psi(theta + dtheta)>|^2) - dtheta^T G dtheta|.
double fidelity_expansion_residual(const AnsatzSpec& spec,
                                   const FeatureVector& x,
                                   const ParameterVector& theta,
                                   const ParameterVector& dtheta);

}  // namespace sculpt
