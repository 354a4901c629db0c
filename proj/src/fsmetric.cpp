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

#include "sculpt/fsmetric.hpp"

#include <complex>

#include "sculpt/parallel.hpp"

namespace sculpt {
namespace {

using Complex = std::complex<double>;
using GateSpan = std::span<const GateOp>;

/// Gate position of every trainable parameter in `seq`.
std::vector<int> locate_params(const GateSequence& seq, int num_params) {
  std::vector<int> pos(num_params, -1);
  for (int g = 0; g < static_cast<int>(seq.gates.size()); ++g) {
    if (const auto& k = seq.gates[g].param_index) pos[*k] = g;
  }
  return pos;
}

/// s <- (-i/2) P s, with P the generator of the rotation `gate`.
void apply_scaled_generator(StateVector& s, const GateOp& gate) {
  apply_gate_inplace(s, GateOp::pauli(generator_of(gate.kind), gate.target));
  s.amplitudes() *= Complex(0.0, -0.5);
  s.set_unnormalized(true);
}

GateSpan gate_range(const GateSequence& seq, int begin, int end) {
  return GateSpan(seq.gates).subspan(begin, end - begin);
}

/// Forward pass that keeps the state right after every parameterized gate.
struct ForwardPass {
  GateSequence seq;
  std::vector<int> pos;
  std::vector<StateVector> after;  // indexed by parameter
  StateVector psi;
};

ForwardPass forward_pass(const AnsatzSpec& spec, const FeatureVector& x,
                         const ParameterVector& theta) {
  ForwardPass fp;
  fp.seq = build_circuit(spec, x, theta);
  fp.pos = locate_params(fp.seq, spec.num_params());
  fp.after.resize(spec.num_params());
  StateVector s(spec.num_qubits);
  for (const auto& g : fp.seq.gates) {
    apply_gate_inplace(s, g);
    if (g.param_index) fp.after[*g.param_index] = s;
  }
  fp.psi = std::move(s);
  return fp;
}

/// G_ij over the listed parameters, from derivative states expressed in a
/// common frame with the reference state `psi` of that frame.
Eigen::MatrixXd overlap_metric(const std::vector<StateVector>& derivs,
                               const StateVector& psi) {
  const auto m = static_cast<Eigen::Index>(derivs.size());
  Eigen::MatrixXcd d(psi.dim(), m);
  for (Eigen::Index i = 0; i < m; ++i) d.col(i) = derivs[i].amplitudes();
  const Eigen::MatrixXcd overlaps = d.adjoint() * d;
  const Eigen::VectorXcd proj = d.adjoint() * psi.amplitudes();  // <d_i|psi>
  Eigen::MatrixXd g = (overlaps - proj * proj.adjoint()).real();
  return 0.5 * (g + g.transpose());
}

/// 1/4 (Re<P_i P_j> - <P_i><P_j>) over the qubits for Pauli `kind`.
Eigen::MatrixXd group_block(const StateVector& s, GateKind kind, int n) {
  const Eigen::Index dim = s.dim();
  Eigen::MatrixXcd ps(dim, n);
  for (int q = 0; q < n; ++q) {
    StateVector t = s;
    apply_gate_inplace(t, GateOp::pauli(kind, q));
    ps.col(q) = t.amplitudes();
  }
  const Eigen::Map<const Eigen::MatrixXd> real_p(reinterpret_cast<const double*>(ps.data()),
                                                 2 * dim, n);
  const Eigen::Map<const Eigen::VectorXd> real_s(
      reinterpret_cast<const double*>(s.amplitudes().data()), 2 * dim);
  const Eigen::VectorXd mean = real_p.transpose() * real_s;
  Eigen::MatrixXd g = real_p.transpose() * real_p;
  g -= mean * mean.transpose();
  return 0.25 * (0.5 * (g + g.transpose()));
}

void run_groups(const AnsatzSpec& spec, const ParameterVector& theta,
                RotationGroupPass& pass, int first, StateVector s, bool reuse_first) {
  const int n = spec.num_qubits;
  const int groups = 3 * spec.num_layers;
  for (int g = first; g < groups; ++g) {
    const int layer = g / 3;
    const int rot = g % 3;
    const GateKind kind = rotation_kind(rot);
    if (!(reuse_first && g == first)) {
      pass.entering[g] = s;
      pass.blocks[g] = group_block(s, generator_of(kind), n);
    }
    for (int q = 0; q < n; ++q) {
      apply_gate_inplace(s, GateOp::rotation(kind, q, theta(param_index(spec, layer, q, rot))));
    }
    if (rot == 2 && n > 1) {
      for (int q = 0; q < n; ++q) apply_gate_inplace(s, GateOp::cnot(q, (q + 1) % n));
    }
  }
}

void check_dims(const AnsatzSpec& spec, const FeatureVector& x,
                const ParameterVector& theta) {
  spec.validate();
  if (x.size() != spec.feature_dim || theta.size() != spec.num_params()) {
    throw DimensionError("metric: feature/parameter length mismatch");
  }
}

}  // namespace

std::string to_string(MetricSource source) {
  switch (source) {
    case MetricSource::kProjector: return "projector";
    case MetricSource::kCovariance: return "covariance";
    case MetricSource::kBlockDiag: return "block_diag";
    case MetricSource::kBatchAvg: return "batch_avg";
  }
  return "unknown";
}

std::string to_string(BlockPartition partition) {
  return partition == BlockPartition::kLayer ? "layer" : "rotation_group";
}

BlockPartition parse_block_partition(const std::string& name) {
  if (name == "layer") return BlockPartition::kLayer;
  if (name == "rotation_group") return BlockPartition::kRotationGroup;
  throw DataError("unknown block partition '" + name +
                  "' (expected 'layer' or 'rotation_group')");
}

std::vector<std::vector<int>> make_blocks(const AnsatzSpec& spec,
                                          BlockPartition partition) {
  std::vector<std::vector<int>> blocks;
  for (int layer = 0; layer < spec.num_layers; ++layer) {
    if (partition == BlockPartition::kLayer) {
      std::vector<int> b(spec.layer_width());
      for (int i = 0; i < spec.layer_width(); ++i) {
        b[i] = layer * spec.layer_width() + i;
      }
      blocks.push_back(std::move(b));
    } else {
      for (int rot = 0; rot < 3; ++rot) {
        std::vector<int> b;
        for (int q = 0; q < spec.num_qubits; ++q) {
          b.push_back(param_index(spec, layer, q, rot));
        }
        blocks.push_back(std::move(b));
      }
    }
  }
  return blocks;
}

StateVector derivative_state(const AnsatzSpec& spec, const FeatureVector& x,
                             const ParameterVector& theta, int k) {
  check_dims(spec, x, theta);
  if (k < 0 || k >= spec.num_params()) {
    throw DimensionError("derivative_state: parameter index " +
                         std::to_string(k) + " out of range");
  }
  const GateSequence seq = build_circuit(spec, x, theta);
  const int gk = locate_params(seq, spec.num_params())[k];
  StateVector s(spec.num_qubits);
  run_gates_inplace(s, gate_range(seq, 0, gk + 1));
  apply_scaled_generator(s, seq.gates[gk]);
  run_gates_inplace(s, gate_range(seq, gk + 1, static_cast<int>(seq.gates.size())));
  return s;
}

MetricTensor fs_metric_projector(const AnsatzSpec& spec, const FeatureVector& x,
                                 const ParameterVector& theta) {
  check_dims(spec, x, theta);
  ForwardPass fp = forward_pass(spec, x, theta);
  const int p = spec.num_params();
  const int end = static_cast<int>(fp.seq.gates.size());
  std::vector<StateVector> derivs(p);
  for (int k = 0; k < p; ++k) {
    StateVector s = fp.after[k];
    apply_scaled_generator(s, fp.seq.gates[fp.pos[k]]);
    run_gates_inplace(s, gate_range(fp.seq, fp.pos[k] + 1, end));
    derivs[k] = std::move(s);
  }
  return {overlap_metric(derivs, fp.psi), {}, MetricSource::kProjector};
}

MetricTensor fs_metric_covariance(const AnsatzSpec& spec,
                                  const FeatureVector& x,
                                  const ParameterVector& theta) {
  check_dims(spec, x, theta);
  const GateSequence seq = build_circuit(spec, x, theta);
  const std::vector<int> pos = locate_params(seq, spec.num_params());
  const int p = spec.num_params();
  const int end = static_cast<int>(seq.gates.size());
  const StateVector psi = run_sequence(seq, StateVector(spec.num_qubits));

  Eigen::MatrixXcd k_psi(psi.dim(), p);
  Eigen::VectorXd mean(p);
  for (int i = 0; i < p; ++i) {
    const GateSpan post = gate_range(seq, pos[i] + 1, end);
    StateVector s = psi;
    run_gates_inverse_inplace(s, post);
    apply_gate_inplace(s, GateOp::pauli(generator_of(seq.gates[pos[i]].kind),
                                        seq.gates[pos[i]].target));
    run_gates_inplace(s, post);
    k_psi.col(i) = s.amplitudes();
    mean(i) = inner_product(psi, s).real();
  }
  Eigen::MatrixXd second = (k_psi.adjoint() * k_psi).real();
  second = 0.5 * (second + second.transpose());
  Eigen::MatrixXd g = 0.25 * (second - mean * mean.transpose());
  return {0.5 * (g + g.transpose()), {}, MetricSource::kCovariance};
}

RotationGroupPass rotation_group_pass(const AnsatzSpec& spec, const FeatureVector& x,
                                      const ParameterVector& theta) {
  check_dims(spec, x, theta);
  const GateSequence seq = build_circuit(spec, x, theta);
  StateVector s(spec.num_qubits);
  run_gates_inplace(s, gate_range(seq, 0, 2 * spec.feature_dim));
  RotationGroupPass pass;
  pass.entering.resize(3 * spec.num_layers);
  pass.blocks.resize(3 * spec.num_layers);
  run_groups(spec, theta, pass, 0, std::move(s), false);
  return pass;
}

RotationGroupPass rotation_group_pass_from(const AnsatzSpec& spec,
                                           const ParameterVector& theta,
                                           const RotationGroupPass& base, int group) {
  if (theta.size() != spec.num_params()) {
    throw DimensionError("rotation_group_pass_from: parameter length mismatch");
  }
  if (group < 0 || group >= static_cast<int>(base.entering.size())) {
    throw DimensionError("rotation_group_pass_from: group out of range");
  }
  RotationGroupPass pass = base;
  run_groups(spec, theta, pass, group, base.entering[group], true);
  return pass;
}

MetricTensor fs_metric_block_diag(const AnsatzSpec& spec,
                                  const FeatureVector& x,
                                  const ParameterVector& theta,
                                  BlockPartition partition) {
  if (partition == BlockPartition::kRotationGroup) {
    const RotationGroupPass pass = rotation_group_pass(spec, x, theta);
    MetricTensor out{Eigen::MatrixXd::Zero(spec.num_params(), spec.num_params()),
                     make_blocks(spec, partition), MetricSource::kBlockDiag};
    for (std::size_t g = 0; g < out.blocks.size(); ++g) {
      const auto& block = out.blocks[g];
      for (std::size_t a = 0; a < block.size(); ++a) {
        for (std::size_t b = 0; b < block.size(); ++b) {
          out.entries(block[a], block[b]) = pass.blocks[g](a, b);
        }
      }
    }
    return out;
  }

  check_dims(spec, x, theta);
  const GateSequence seq = build_circuit(spec, x, theta);
  const int p = spec.num_params();
  const int n = spec.num_qubits;
  const int w = spec.layer_width();
  const Eigen::Index dim = Eigen::Index{1} << n;

  MetricTensor out{Eigen::MatrixXd::Zero(p, p), make_blocks(spec, partition),
                   MetricSource::kBlockDiag};
  // Column of parameter (q, r) inside its layer's derivative matrix; puts
  // each rotation group in a contiguous run.
  auto column = [n, w](int k) { return (k % w % 3) * n + (k % w) / 3; };

  // Every block lies inside one layer. In the frame right after that layer's
  // rotations the trailing gates drop out of all overlaps, and since the
  // layer's rotations act on distinct qubits before any entangler, the
  // derivative for (q, r) is (-i/2) V P_r V^dagger on qubit q applied to the
  // frame state, where V is the product of the later rotations on q.
  std::vector<const GateOp*> rotation(p);
  StateVector frame(n);
  Eigen::MatrixXcd derivs(dim, w);
  Eigen::VectorXcd i_psi(dim);
  std::size_t next_block = 0;
  for (const auto& g : seq.gates) {
    apply_gate_inplace(frame, g);
    if (!g.param_index) continue;
    rotation[*g.param_index] = &g;
    if (*g.param_index % w != w - 1) continue;

    const int layer = *g.param_index / w;
    for (int q = 0; q < n; ++q) {
      Eigen::Matrix2cd v = Eigen::Matrix2cd::Identity();
      for (int r = 2; r >= 0; --r) {
        const GateOp& gate = *rotation[param_index(spec, layer, q, r)];
        const Eigen::Matrix2cd a =
            Complex(0.0, -0.5) * (v * single_qubit_matrix<double>(generator_of(gate.kind)) *
                                  v.adjoint());
        auto col = derivs.col(r * n + q);
        col = frame.amplitudes();
        detail::for_each_pair<double>(col.data(), dim, q, [&a](Complex& u, Complex& t) {
          const Complex nu = a(0, 0) * u + a(0, 1) * t;
          t = a(1, 0) * u + a(1, 1) * t;
          u = nu;
        });
        v = v * single_qubit_matrix<double>(gate.kind, *gate.angle);
      }
    }

    // Re<a|b> is the real dot product of the interleaved (re, im) arrays,
    // and Im<d|psi> = -Re<d|i psi>.
    i_psi = Complex(0.0, 1.0) * frame.amplitudes();
    const Eigen::Map<const Eigen::MatrixXd> real_d(
        reinterpret_cast<const double*>(derivs.data()), 2 * dim, w);
    const Eigen::Map<const Eigen::VectorXd> real_psi(
        reinterpret_cast<const double*>(frame.amplitudes().data()), 2 * dim);
    const Eigen::Map<const Eigen::VectorXd> real_ipsi(
        reinterpret_cast<const double*>(i_psi.data()), 2 * dim);
    for (; next_block < out.blocks.size() &&
           out.blocks[next_block].front() / w == layer;
         ++next_block) {
      const auto& block = out.blocks[next_block];
      const auto m = static_cast<Eigen::Index>(block.size());
      Eigen::MatrixXd sub(2 * dim, m);
      for (Eigen::Index a = 0; a < m; ++a) sub.col(a) = real_d.col(column(block[a]));
      const Eigen::VectorXd re = sub.transpose() * real_psi;
      const Eigen::VectorXd im = sub.transpose() * real_ipsi;
      Eigen::MatrixXd gb = sub.transpose() * sub;
      gb -= re * re.transpose() + im * im.transpose();
      for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
          out.entries(block[a], block[b]) = 0.5 * (gb(a, b) + gb(b, a));
        }
      }
    }
  }
  return out;
}

MetricTensor fs_metric_batch_avg(const AnsatzSpec& spec,
                                 std::span<const FeatureVector> batch,
                                 const ParameterVector& theta,
                                 BlockPartition partition) {
  if (batch.empty()) throw DimensionError("fs_metric_batch_avg: empty batch");
  std::vector<Eigen::MatrixXd> parts(batch.size());
  parallel_for(batch.size(), [&](std::size_t j) {
    parts[j] = fs_metric_block_diag(spec, batch[j], theta, partition).entries;
  });
  Eigen::MatrixXd sum = parts.front();
  for (std::size_t j = 1; j < parts.size(); ++j) sum += parts[j];
  return {sum / static_cast<double>(batch.size()), make_blocks(spec, partition),
          MetricSource::kBatchAvg};
}

double fidelity_expansion_residual(const AnsatzSpec& spec,
                                   const FeatureVector& x,
                                   const ParameterVector& theta,
                                   const ParameterVector& dtheta) {
  check_dims(spec, x, theta);
  if (dtheta.size() != theta.size()) {
    throw DimensionError("fidelity_expansion_residual: dtheta length mismatch");
  }
  const StateVector a = circuit_state(spec, x, theta);
  const StateVector b = circuit_state(spec, x, theta + dtheta);
  const double ds2 = 1.0 - fidelity(a, b);
  const Eigen::MatrixXd g = fs_metric_projector(spec, x, theta).entries;
  return std::abs(ds2 - dtheta.dot(g * dtheta));
}

}  // namespace sculpt
