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

#include "sculpt/ansatz.hpp"

#include <iostream>
#include <string>

namespace sculpt {

void AnsatzSpec::validate() const {
  if (num_qubits < 1 || num_qubits > 20) {
    throw DimensionError("ansatz: num_qubits must be in [1, 20]");
  }
  if (num_layers < 0) throw DimensionError("ansatz: num_layers must be >= 0");
  if (feature_dim < 0) throw DimensionError("ansatz: feature_dim must be >= 0");
}

int param_index(const AnsatzSpec& spec, int layer, int qubit, int rot) {
  return layer * spec.layer_width() + qubit * 3 + rot;
}

ParamSlot param_slot(const AnsatzSpec& spec, int index) {
  const int w = spec.layer_width();
  return {index / w, (index % w) / 3, index % 3};
}

GateKind rotation_kind(int rot) {
  switch (rot) {
    case 0: return GateKind::kRX;
    case 1: return GateKind::kRY;
    case 2: return GateKind::kRZ;
  }
  throw InvalidGateError("rotation index must be 0, 1 or 2");
}

GateSequence build_circuit(const AnsatzSpec& spec, const FeatureVector& x,
                           const ParameterVector& theta) {
  spec.validate();
  if (x.size() != spec.feature_dim) {
    throw DimensionError("build_circuit: feature vector has " +
                         std::to_string(x.size()) + " entries, expected " +
                         std::to_string(spec.feature_dim));
  }
  if (theta.size() != spec.num_params()) {
    throw DimensionError("build_circuit: parameter vector has " +
                         std::to_string(theta.size()) + " entries, expected " +
                         std::to_string(spec.num_params()));
  }
  const int n = spec.num_qubits;
  GateSequence seq;
  seq.num_qubits = n;
  seq.gates.reserve(2 * spec.feature_dim + spec.num_layers * 4 * n);
  for (int i = 0; i < spec.feature_dim; ++i) {
    seq.gates.push_back(GateOp::rotation(GateKind::kRX, i % n, x(i)));
    seq.gates.push_back(
        GateOp::rotation(GateKind::kRZ, i % n, spec.encoding_rz_scale * x(i)));
  }
  for (int layer = 0; layer < spec.num_layers; ++layer) {
    for (int q = 0; q < n; ++q) {
      for (int rot = 0; rot < 3; ++rot) {
        const int k = param_index(spec, layer, q, rot);
        seq.gates.push_back(GateOp::rotation(rotation_kind(rot), q, theta(k), k));
      }
    }
    if (n > 1) {
      for (int q = 0; q < n; ++q) {
        seq.gates.push_back(GateOp::cnot(q, (q + 1) % n));
      }
    }
  }
  return seq;
}

ParameterVector compose_parameters(const ParameterVector& theta_task,
                                   const ParameterVector& theta_meta,
                                   double lambda) {
  if (theta_task.size() != theta_meta.size()) {
    throw DimensionError("compose_parameters: length mismatch");
  }
  if (lambda < 0.0 || lambda > 1.0) {
    std::cerr << "warning: meta-scaling lambda=" << lambda
              << " outside [0, 1]\n";
  }
  if (lambda == 0.0) return theta_task;
  return theta_task + lambda * theta_meta;
}

StateVector circuit_state(const AnsatzSpec& spec, const FeatureVector& x,
                          const ParameterVector& theta) {
  return run_sequence(build_circuit(spec, x, theta), StateVector(spec.num_qubits));
}

}  // namespace sculpt
