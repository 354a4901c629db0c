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

/// Dense statevector simulation of the rotation/CNOT/Pauli gate set.
///
/// Amplitude ordering: qubit 0 is the least significant bit of the basis
/// index, so |q_{n-1} ... q_1 q_0> lives at index sum_q q * 2^q.
/// Rotations follow R_P(theta) = exp(-i theta P / 2).

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sculpt/errors.hpp"

namespace sculpt {

enum class GateKind { kRX, kRY, kRZ, kCNOT, kPauliX, kPauliY, kPauliZ };

constexpr bool is_rotation(GateKind kind) {
  return kind == GateKind::kRX || kind == GateKind::kRY ||
         kind == GateKind::kRZ;
}

/// The Pauli that generates a rotation kind.
constexpr GateKind generator_of(GateKind rotation) {
  switch (rotation) {
    case GateKind::kRX:
      return GateKind::kPauliX;
    case GateKind::kRY:
      return GateKind::kPauliY;
    case GateKind::kRZ:
      return GateKind::kPauliZ;
    default:
      return rotation;
  }
}

inline std::string gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::kRX: return "RX";
    case GateKind::kRY: return "RY";
    case GateKind::kRZ: return "RZ";
    case GateKind::kCNOT: return "CNOT";
    case GateKind::kPauliX: return "X";
    case GateKind::kPauliY: return "Y";
    case GateKind::kPauliZ: return "Z";
  }
  return "?";
}

template <typename Real>
struct BasicGateOp {
  GateKind kind = GateKind::kPauliZ;
  int target = 0;
  std::optional<int> control;
  std::optional<Real> angle;
  /// Slot in the trainable parameter vector; empty for encoding/fixed gates.
  std::optional<int> param_index;

  static BasicGateOp rotation(GateKind kind, int target, Real angle,
                              std::optional<int> param_index = std::nullopt) {
    return {kind, target, std::nullopt, angle, param_index};
  }
  static BasicGateOp cnot(int control, int target) {
    return {GateKind::kCNOT, target, control, std::nullopt, std::nullopt};
  }
  static BasicGateOp pauli(GateKind kind, int target) {
    return {kind, target, std::nullopt, std::nullopt, std::nullopt};
  }
};

template <typename Real>
void validate_gate(const BasicGateOp<Real>& gate, int num_qubits) {
  if (gate.target < 0 || gate.target >= num_qubits) {
    throw InvalidGateError(gate_name(gate.kind) + ": target " +
                           std::to_string(gate.target) +
                           " out of range for " + std::to_string(num_qubits) +
                           " qubits");
  }
  if (gate.kind == GateKind::kCNOT) {
    if (!gate.control || *gate.control < 0 || *gate.control >= num_qubits) {
      throw InvalidGateError("CNOT: control missing or out of range");
    }
    if (*gate.control == gate.target) {
      throw InvalidGateError("CNOT: control equals target");
    }
  } else if (gate.control) {
    throw InvalidGateError(gate_name(gate.kind) + ": unexpected control");
  }
  if (is_rotation(gate.kind) != gate.angle.has_value()) {
    throw InvalidGateError(gate_name(gate.kind) +
                           ": angle must be present iff the gate is a rotation");
  }
}

template <typename Real>
struct BasicGateSequence {
  int num_qubits = 0;
  std::vector<BasicGateOp<Real>> gates;

  void validate() const {
    for (const auto& g : gates) validate_gate(g, num_qubits);
  }
};

template <typename Real>
class BasicStateVector {
 public:
  using Complex = std::complex<Real>;
  using Amplitudes = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

  BasicStateVector() = default;

  /// |0...0> on `num_qubits` qubits.
  explicit BasicStateVector(int num_qubits)
      : num_qubits_(num_qubits), amps_(Amplitudes::Zero(dim_for(num_qubits))) {
    amps_(0) = Complex(1);
  }

  static BasicStateVector basis(int num_qubits, std::uint64_t index) {
    BasicStateVector s(num_qubits);
    if (index >= static_cast<std::uint64_t>(s.dim())) {
      throw DimensionError("basis index out of range");
    }
    s.amps_(0) = Complex(0);
    s.amps_(static_cast<Eigen::Index>(index)) = Complex(1);
    return s;
  }

  static BasicStateVector from_amplitudes(Amplitudes amps,
                                          bool unnormalized = false) {
    const auto n = amps.size();
    int q = 0;
    while ((Eigen::Index{1} << q) < n) ++q;
    if (n == 0 || (Eigen::Index{1} << q) != n) {
      throw DimensionError("amplitude count must be a power of two");
    }
    BasicStateVector s;
    s.num_qubits_ = q;
    s.amps_ = std::move(amps);
    s.unnormalized_ = unnormalized;
    return s;
  }

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return amps_.size(); }
  const Amplitudes& amplitudes() const { return amps_; }
  Amplitudes& amplitudes() { return amps_; }
  Complex operator[](Eigen::Index i) const { return amps_(i); }

  /// Derivative/tangent states are not unit norm and say so.
  bool unnormalized() const { return unnormalized_; }
  void set_unnormalized(bool flag) { unnormalized_ = flag; }

  Real norm() const { return amps_.norm(); }

 private:
  static Eigen::Index dim_for(int num_qubits) {
    if (num_qubits < 0 || num_qubits > 30) {
      throw DimensionError("unsupported qubit count " +
                           std::to_string(num_qubits));
    }
    return Eigen::Index{1} << num_qubits;
  }

  int num_qubits_ = 0;
  Amplitudes amps_;
  bool unnormalized_ = false;
};

namespace detail {

template <typename Real, typename Fn>
void for_each_pair(std::complex<Real>* a, Eigen::Index dim, int target,
                   Fn&& fn) {
  const Eigen::Index stride = Eigen::Index{1} << target;
  for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
    for (Eigen::Index i = base; i < base + stride; ++i) {
      fn(a[i], a[i + stride]);
    }
  }
}

template <typename Real>
void apply_single(std::complex<Real>* a, Eigen::Index dim, GateKind kind,
                  int target, Real angle) {
  using C = std::complex<Real>;
  const Real c = std::cos(angle / 2);
  const Real s = std::sin(angle / 2);
  switch (kind) {
    case GateKind::kRX:
      for_each_pair<Real>(a, dim, target, [c, s](C& u, C& v) {
        const C mis(0, -s);
        const C nu = c * u + mis * v;
        v = mis * u + c * v;
        u = nu;
      });
      break;
    case GateKind::kRY:
      for_each_pair<Real>(a, dim, target, [c, s](C& u, C& v) {
        const C nu = c * u - s * v;
        v = s * u + c * v;
        u = nu;
      });
      break;
    case GateKind::kRZ: {
      const C lo(c, -s);
      const C hi(c, s);
      for_each_pair<Real>(a, dim, target, [lo, hi](C& u, C& v) {
        u *= lo;
        v *= hi;
      });
      break;
    }
    case GateKind::kPauliX:
      for_each_pair<Real>(a, dim, target, [](C& u, C& v) { std::swap(u, v); });
      break;
    case GateKind::kPauliY:
      for_each_pair<Real>(a, dim, target, [](C& u, C& v) {
        const C nu(v.imag(), -v.real());  // -i v
        v = C(-u.imag(), u.real());       // i u
        u = nu;
      });
      break;
    case GateKind::kPauliZ:
      for_each_pair<Real>(a, dim, target, [](C&, C& v) { v = -v; });
      break;
    case GateKind::kCNOT:
      break;
  }
}

template <typename Real>
void apply_cnot(std::complex<Real>* a, Eigen::Index dim, int control,
                int target) {
  const Eigen::Index cbit = Eigen::Index{1} << control;
  const Eigen::Index tbit = Eigen::Index{1} << target;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if ((i & cbit) && !(i & tbit)) std::swap(a[i], a[i | tbit]);
  }
}

}  // namespace detail

/// 2x2 matrix of a single-qubit gate kind (rotations use `angle`).
template <typename Real>
Eigen::Matrix<std::complex<Real>, 2, 2> single_qubit_matrix(GateKind kind,
                                                             Real angle = 0) {
  using C = std::complex<Real>;
  const Real c = std::cos(angle / 2);
  const Real s = std::sin(angle / 2);
  Eigen::Matrix<C, 2, 2> m;
  switch (kind) {
    case GateKind::kRX: m << C(c), C(0, -s), C(0, -s), C(c); break;
    case GateKind::kRY: m << C(c), C(-s), C(s), C(c); break;
    case GateKind::kRZ: m << C(c, -s), C(0), C(0), C(c, s); break;
    case GateKind::kPauliX: m << C(0), C(1), C(1), C(0); break;
    case GateKind::kPauliY: m << C(0), C(0, -1), C(0, 1), C(0); break;
    case GateKind::kPauliZ: m << C(1), C(0), C(0), C(-1); break;
    case GateKind::kCNOT:
      throw InvalidGateError("CNOT is not a single-qubit gate");
  }
  return m;
}

/// Applies an arbitrary 2x2 operator (not necessarily unitary) to `target`.
template <typename Real>
void apply_matrix_inplace(BasicStateVector<Real>& state,
                          const Eigen::Matrix<std::complex<Real>, 2, 2>& m,
                          int target) {
  using C = std::complex<Real>;
  if (target < 0 || target >= state.num_qubits()) {
    throw InvalidGateError("target qubit " + std::to_string(target) +
                           " out of range");
  }
  const C m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
  detail::for_each_pair<Real>(state.amplitudes().data(), state.dim(), target,
                              [=](C& u, C& v) {
                                const C nu = m00 * u + m01 * v;
                                v = m10 * u + m11 * v;
                                u = nu;
                              });
}

/// Applies `gate` in place. Pauli kinds apply the bare Pauli operator.
template <typename Real>
void apply_gate_inplace(BasicStateVector<Real>& state,
                        const BasicGateOp<Real>& gate) {
  validate_gate(gate, state.num_qubits());
  auto* a = state.amplitudes().data();
  if (gate.kind == GateKind::kCNOT) {
    detail::apply_cnot(a, state.dim(), *gate.control, gate.target);
  } else {
    detail::apply_single(a, state.dim(), gate.kind, gate.target,
                         gate.angle.value_or(Real(0)));
  }
}

/// Applies the adjoint of `gate` in place.
template <typename Real>
void apply_inverse_gate_inplace(BasicStateVector<Real>& state,
                                const BasicGateOp<Real>& gate) {
  if (is_rotation(gate.kind)) {
    auto inv = gate;
    inv.angle = -*gate.angle;
    apply_gate_inplace(state, inv);
  } else {
    apply_gate_inplace(state, gate);  // X, Y, Z, CNOT are self-inverse
  }
}

template <typename Real>
BasicStateVector<Real> apply_gate(BasicStateVector<Real> state,
                                  const BasicGateOp<Real>& gate) {
  apply_gate_inplace(state, gate);
  return state;
}

template <typename Real>
void run_gates_inplace(BasicStateVector<Real>& state,
                       std::span<const BasicGateOp<Real>> gates) {
  for (const auto& g : gates) apply_gate_inplace(state, g);
}

/// Runs the inverse of `gates`: adjoints applied last-to-first.
template <typename Real>
void run_gates_inverse_inplace(BasicStateVector<Real>& state,
                               std::span<const BasicGateOp<Real>> gates) {
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
    apply_inverse_gate_inplace(state, *it);
  }
}

/// Applies gates in list order (index 0 first).
template <typename Real>
BasicStateVector<Real> run_sequence(const BasicGateSequence<Real>& seq,
                                    BasicStateVector<Real> initial) {
  if (initial.num_qubits() != seq.num_qubits) {
    throw DimensionError("sequence and state qubit counts differ");
  }
  run_gates_inplace(initial, std::span<const BasicGateOp<Real>>(seq.gates));
  return initial;
}

/// <a|b>, conjugate-linear in `a`.
template <typename Real>
std::complex<Real> inner_product(const BasicStateVector<Real>& a,
                                 const BasicStateVector<Real>& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("inner_product: dimension mismatch");
  }
  return a.amplitudes().dot(b.amplitudes());
}

template <typename Real>
Real fidelity(const BasicStateVector<Real>& a, const BasicStateVector<Real>& b) {
  return std::norm(inner_product(a, b));
}

/// <Z_q> for every qubit q.
template <typename Real>
Eigen::Matrix<Real, Eigen::Dynamic, 1> pauli_z_expectations(
    const BasicStateVector<Real>& state) {
  const int n = state.num_qubits();
  Eigen::Matrix<Real, Eigen::Dynamic, 1> out =
      Eigen::Matrix<Real, Eigen::Dynamic, 1>::Zero(n);
  const auto& a = state.amplitudes();
  for (Eigen::Index i = 0; i < state.dim(); ++i) {
    const Real p = std::norm(a(i));
    for (int q = 0; q < n; ++q) {
      out(q) += ((i >> q) & 1) ? -p : p;
    }
  }
  return out;
}

using GateOp = BasicGateOp<double>;
using GateSequence = BasicGateSequence<double>;
using StateVector = BasicStateVector<double>;

}  // namespace sculpt
