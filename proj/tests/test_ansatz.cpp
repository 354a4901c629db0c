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

#include <algorithm>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "sculpt/ansatz.hpp"
#include "support/oracle.hpp"

namespace sculpt {
namespace {

TEST(Ansatz, DefaultCircuitHas112Gates) {
  const AnsatzSpec spec;
  const auto seq = build_circuit(spec, FeatureVector::Zero(8), ParameterVector::Zero(72));
  EXPECT_EQ(seq.gates.size(), 112u);
  EXPECT_EQ(spec.num_params(), 72);
}

TEST(Ansatz, TwoQubitOneLayerLayout) {
  AnsatzSpec spec{2, 1, 1};
  const auto seq = build_circuit(spec, FeatureVector::Constant(1, 0.3),
                                 ParameterVector::LinSpaced(6, 1, 6));
  ASSERT_EQ(seq.gates.size(), 2u + 6u + 2u);
  EXPECT_EQ(seq.gates[0].kind, GateKind::kRX);
  EXPECT_DOUBLE_EQ(*seq.gates[1].angle, 0.003);
  const GateKind order[3] = {GateKind::kRX, GateKind::kRY, GateKind::kRZ};
  for (int i = 0; i < 6; ++i) {
    const auto& g = seq.gates[2 + i];
    EXPECT_EQ(g.kind, order[i % 3]);
    EXPECT_EQ(g.target, i / 3);
    EXPECT_EQ(*g.param_index, i);
    EXPECT_DOUBLE_EQ(*g.angle, i + 1.0);
  }
  EXPECT_EQ(*seq.gates[8].control, 0);
  EXPECT_EQ(seq.gates[8].target, 1);
  EXPECT_EQ(*seq.gates[9].control, 1);
  EXPECT_EQ(seq.gates[9].target, 0);
}

TEST(Ansatz, SingleQubitHasNoRing) {
  AnsatzSpec spec{1, 2, 1};
  const auto seq = build_circuit(spec, FeatureVector::Zero(1), ParameterVector::Zero(6));
  EXPECT_EQ(seq.gates.size(), 8u);
  for (const auto& g : seq.gates) EXPECT_NE(g.kind, GateKind::kCNOT);
}

TEST(Ansatz, FeaturesWrapOntoQubits) {
  AnsatzSpec spec{3, 0, 7};
  const auto seq = build_circuit(spec, FeatureVector::LinSpaced(7, 0, 6), ParameterVector());
  for (int i = 0; i < 7; ++i) EXPECT_EQ(seq.gates[2 * i].target, i % 3);
}

TEST(Ansatz, RejectsWrongLengths) {
  const AnsatzSpec spec;
  EXPECT_THROW(build_circuit(spec, FeatureVector::Zero(7), ParameterVector::Zero(72)),
               DimensionError);
  EXPECT_THROW(build_circuit(spec, FeatureVector::Zero(8), ParameterVector::Zero(71)),
               DimensionError);
  EXPECT_THROW(build_circuit(AnsatzSpec{0, 1, 1}, FeatureVector::Zero(1), ParameterVector()),
               DimensionError);
  EXPECT_THROW(compose_parameters(ParameterVector::Zero(3), ParameterVector::Zero(4), 0.5),
               DimensionError);
}

TEST(Ansatz, ComposeParameters) {
  const ParameterVector task = ParameterVector::LinSpaced(4, 0, 3);
  const ParameterVector meta = ParameterVector::Constant(4, 2.0);
  EXPECT_EQ(compose_parameters(task, meta, 0.0), task);
  EXPECT_TRUE(compose_parameters(task, meta, 0.5).isApprox((task.array() + 1.0).matrix()));
  // Outside [0, 1] is allowed with a warning.
  EXPECT_TRUE(compose_parameters(task, meta, 2.0).isApprox((task.array() + 4.0).matrix()));
}

TEST(AnsatzProperty, ParamIndexIsABijection) {
  for (int n = 1; n <= 5; ++n)
    for (int l = 1; l <= 3; ++l) {
      AnsatzSpec spec{n, l, n};
      std::set<int> seen;
      for (int layer = 0; layer < l; ++layer)
        for (int q = 0; q < n; ++q)
          for (int r = 0; r < 3; ++r) {
            const int k = param_index(spec, layer, q, r);
            seen.insert(k);
            const auto slot = param_slot(spec, k);
            EXPECT_EQ(slot.layer, layer);
            EXPECT_EQ(slot.qubit, q);
            EXPECT_EQ(slot.rot, r);
          }
      EXPECT_EQ(static_cast<int>(seen.size()), spec.num_params());
      EXPECT_EQ(*seen.rbegin(), spec.num_params() - 1);
    }
}

TEST(AnsatzProperty, StateMatchesTextbookCircuit) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    AnsatzSpec spec{1 + trial % 4, 1 + trial % 3, 1 + trial % 5};
    const auto x = oracle::uniform_vector(rng, spec.feature_dim, -2, 2);
    const auto theta = oracle::uniform_vector(rng, spec.num_params(), 0, std::numbers::pi);
    const auto ref = oracle::run(oracle::ansatz(spec.num_qubits, spec.num_layers, x, theta),
                                 spec.num_qubits);
    EXPECT_LE((circuit_state(spec, x, theta).amplitudes() - ref).norm(), 1e-12);
  }
}

TEST(AnsatzProperty, EveryParameterAppearsOnce) {
  const AnsatzSpec spec;
  const auto seq = build_circuit(spec, FeatureVector::Zero(8), ParameterVector::Zero(72));
  std::vector<int> count(72, 0);
  for (const auto& g : seq.gates)
    if (g.param_index) ++count[*g.param_index];
  EXPECT_TRUE(std::all_of(count.begin(), count.end(), [](int c) { return c == 1; }));
}

}  // namespace
}  // namespace sculpt
