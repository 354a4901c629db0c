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

#include <Eigen/Dense>

#include "sculpt/simulator.hpp"

namespace sculpt {

/// Rotation angles. Layout: index(layer, qubit, rot) = layer*3N + qubit*3 + rot
/// with rot 0 = RX, 1 = RY, 2 = RZ.
using ParameterVector = Eigen::VectorXd;
/// Standardized input features, encoded as RX(x_i) RZ(scale*x_i) on qubit i mod N.
using FeatureVector = Eigen::VectorXd;

struct AnsatzSpec {
  int num_qubits = 8;
  int num_layers = 3;
  int feature_dim = 8;
  double encoding_rz_scale = 0.01;

  int num_params() const { return num_qubits * num_layers * 3; }
  /// Parameters per layer (3N).
  int layer_width() const { return num_qubits * 3; }
  void validate() const;
};

struct ParamSlot {
  int layer;
  int qubit;
  int rot;  // 0 = RX, 1 = RY, 2 = RZ
};

int param_index(const AnsatzSpec& spec, int layer, int qubit, int rot);
ParamSlot param_slot(const AnsatzSpec& spec, int index);
GateKind rotation_kind(int rot);

/// Encoding block, then per layer: RX RY RZ on every qubit followed by the
/// CNOT ring (q, q+1 mod N). Only the layer rotations carry a param_index.
GateSequence build_circuit(const AnsatzSpec& spec, const FeatureVector& x,
                           const ParameterVector& theta);

/// theta_task + lambda * theta_meta. Warns (does not reject) outside [0, 1].
ParameterVector compose_parameters(const ParameterVector& theta_task,
                                   const ParameterVector& theta_meta,
                                   double lambda);

/// build_circuit run from |0...0>.
StateVector circuit_state(const AnsatzSpec& spec, const FeatureVector& x,
                          const ParameterVector& theta);

}  // namespace sculpt
