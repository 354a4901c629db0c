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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sculpt/spectral.hpp"
#include "support/oracle.hpp"

namespace sculpt {
namespace {

MetricTensor dense(const Eigen::MatrixXd& m) { return {m, {}, MetricSource::kProjector}; }

EigenDecomposition eig_of(std::initializer_list<double> values) {
  EigenDecomposition e;
  e.eigenvalues = Eigen::VectorXd(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) e.eigenvalues(i++) = v;
  e.eigenvectors = Eigen::MatrixXd::Identity(e.eigenvalues.size(), e.eigenvalues.size());
  return e;
}

TEST(Jacobi, DiagonalInputIsSortedDescending) {
  Eigen::Matrix2d m;
  m << 1, 0, 0, 3;
  const auto e = jacobi_eigh(m);
  EXPECT_DOUBLE_EQ(e.eigenvalues(0), 3.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues(1), 1.0);
  EXPECT_EQ(e.sweeps, 0);
}

TEST(Jacobi, TwoByTwoWithCoupling) {
  Eigen::Matrix2d m;
  m << 2, 1, 1, 2;
  const auto e = jacobi_eigh(m);
  EXPECT_NEAR(e.eigenvalues(0), 3.0, 1e-14);
  EXPECT_NEAR(e.eigenvalues(1), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.eigenvectors(0, 0)), M_SQRT1_2, 1e-14);
  EXPECT_NEAR(e.eigenvectors(0, 0), e.eigenvectors(1, 0), 1e-14);
  EXPECT_NEAR(e.eigenvectors(0, 1), -e.eigenvectors(1, 1), 1e-14);
}

TEST(Jacobi, EmptyAndNonSquare) {
  EXPECT_EQ(jacobi_eigh(Eigen::MatrixXd(0, 0)).eigenvalues.size(), 0);
  EXPECT_THROW(jacobi_eigh(Eigen::MatrixXd::Zero(2, 3)), DimensionError);
}

TEST(JacobiProperty, RandomSymmetricAgainstEigenSolver) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 24;
    const Eigen::MatrixXd a = oracle::random_symmetric(rng, n);
    const auto e = jacobi_eigh(a);
    const double fro = a.norm();
    EXPECT_LE((a * e.eigenvectors - e.eigenvectors * e.eigenvalues.asDiagonal()).norm(),
              1e-9 * fro);
    EXPECT_LE((e.eigenvectors.transpose() * e.eigenvectors -
               Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(e.eigenvalues.sum(), a.trace(), 1e-9 * std::max(1.0, fro));
    Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().reverse();
    EXPECT_LE((e.eigenvalues - ref).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, fro));
    for (Eigen::Index i = 1; i < n; ++i) EXPECT_GE(e.eigenvalues(i - 1), e.eigenvalues(i));
  }
}

TEST(Eigh, RejectsAsymmetricInput) {
  Eigen::Matrix2d m;
  m << 1, 0.1, 0, 1;
  EXPECT_THROW(eigh_symmetric(dense(m)), ContractViolation);
}

TEST(Eigh, BlockwiseEqualsDense) {
  std::mt19937_64 rng(42);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(5, 5);
  const std::vector<std::vector<int>> blocks{{0, 2, 4}, {1, 3}};
  for (const auto& b : blocks) {
    const Eigen::MatrixXd s = oracle::random_psd(rng, static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) m(b[i], b[j]) = s(i, j);
  }
  const auto blockwise = eigh_symmetric({m, blocks, MetricSource::kBlockDiag});
  const auto full = eigh_symmetric(dense(m));
  EXPECT_LE((blockwise.eigenvalues - full.eigenvalues).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE((m * blockwise.eigenvectors -
             blockwise.eigenvectors * blockwise.eigenvalues.asDiagonal()).norm(), 1e-12);
  EXPECT_THROW(eigh_symmetric({m, {{0, 2, 4}}, MetricSource::kBlockDiag}), ContractViolation);
}

TEST(Summary, IsotropicSpectrum) {
  const auto s = spectral_summary(eig_of({0.25, 0.25}), 1e-10);
  EXPECT_DOUBLE_EQ(s.kappa, 1.0);
  EXPECT_DOUBLE_EQ(s.log_kappa, 0.0);
  EXPECT_NEAR(s.entropy, std::log(2.0), 1e-15);
  EXPECT_NEAR(s.effective_dim, 2.0, 1e-15);
  EXPECT_NEAR(s.pac_surrogate, 2.0, 1e-15);
  EXPECT_NEAR(s.log_volume, std::log(0.25), 1e-15);
  EXPECT_FALSE(s.degenerate);
}

TEST(Summary, TwoToOne) {
  const auto s = spectral_summary(eig_of({2, 1}), 1e-10);
  EXPECT_DOUBLE_EQ(s.kappa, 2.0);
  EXPECT_DOUBLE_EQ(s.pac_surrogate, 3.0);
  EXPECT_DOUBLE_EQ(s.pac_upper_bound, 4.0);
  EXPECT_NEAR(s.volume, std::sqrt(2.0), 1e-15);
}

TEST(Summary, FiltersAndFlagsDegeneracy) {
  const auto s = spectral_summary(eig_of({1, 1e-12, 1e-12}), 1e-10);
  EXPECT_EQ(s.num_filtered, 2);
  EXPECT_EQ(s.num_retained, 1);
  EXPECT_TRUE(s.degenerate);
  EXPECT_DOUBLE_EQ(s.kappa, 1.0);
  EXPECT_DOUBLE_EQ(s.lambda_min_raw, 1e-12);
  EXPECT_THROW(spectral_summary(eig_of({1e-12, 1e-13}), 1e-10), DegenerateSpectrumError);
  EXPECT_THROW(spectral_summary(eig_of({1}), 0.0), ContractViolation);
}

TEST(SummaryProperty, InvariantsOnRandomPsd) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> scale(0.01, 100);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 2 + trial % 20;
    const Eigen::MatrixXd g = oracle::random_psd(rng, n);
    const auto s = spectral_summary(eigh_symmetric(dense(g)), 1e-10);
    EXPECT_GE(s.kappa, 1.0);
    EXPECT_LE(s.entropy, std::log(static_cast<double>(s.num_retained)) + 1e-12);
    EXPECT_GE(s.effective_dim, 1.0 - 1e-12);
    EXPECT_LE(s.effective_dim, s.num_retained + 1e-9);
    EXPECT_LE(s.pac_surrogate, s.pac_upper_bound * (1 + 1e-12));
    EXPECT_NEAR(s.trace, g.trace(), 1e-10 * g.norm());
    const double c = scale(rng);
    const auto scaled = spectral_summary(eigh_symmetric(dense(c * g)), 1e-10);
    EXPECT_NEAR(scaled.log_kappa, s.log_kappa, 1e-9);
    EXPECT_NEAR(scaled.entropy, s.entropy, 1e-9);
  }
}

TEST(Contraction, KnownValues) {
  EXPECT_DOUBLE_EQ(contraction_factor(1.0), 0.0);
  EXPECT_DOUBLE_EQ(contraction_factor(3.0), 0.25);
  EXPECT_THROW(contraction_factor(0.5), ContractViolation);
  double prev = 0;
  for (double k = 1.5; k < 100; k *= 1.5) {
    const double r = contraction_factor(k);
    EXPECT_GT(r, prev);
    EXPECT_LT(r, 1.0);
    prev = r;
  }
}

TEST(NaturalGradient, DiagonalSolve) {
  Eigen::Matrix2d m;
  m << 2, 0, 0, 1;
  const auto u = natural_gradient(dense(m), Eigen::Vector2d(2, 1), 0.0);
  EXPECT_NEAR(u(0), 1.0, 1e-14);
  EXPECT_NEAR(u(1), 1.0, 1e-14);
  EXPECT_THROW(natural_gradient(dense(m), Eigen::Vector3d(1, 1, 1), 0.0), DimensionError);
  EXPECT_THROW(natural_gradient(dense(Eigen::Matrix2d::Zero()), Eigen::Vector2d(1, 1), 0.0),
               SingularMetricError);
  EXPECT_THROW(natural_gradient(dense(m), Eigen::Vector2d(1, 1), -1.0), ContractViolation);
}

TEST(NaturalGradientProperty, SolvesShiftedSystemWithNormBounds) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + trial % 10;
    const Eigen::MatrixXd g = oracle::random_psd(rng, n);
    const Eigen::VectorXd grad = oracle::normal_vector(rng, n);
    const double ridge = trial % 2 ? 1e-3 : 0.0;
    const auto u = natural_gradient(dense(g), grad, ridge);
    const Eigen::MatrixXd shifted = g + ridge * Eigen::MatrixXd::Identity(n, n);
    EXPECT_LE((shifted * u - grad).norm(), 1e-8 * grad.norm() * shifted.norm());
    const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(shifted).eigenvalues();
    EXPECT_GE(u.norm(), grad.norm() / ev.maxCoeff() * (1 - 1e-9));
    EXPECT_LE(u.norm(), grad.norm() / ev.minCoeff() * (1 + 1e-9));
  }
}

TEST(DLogKappa, DiagonalPerturbation) {
  const auto metric_at = [](double lambda) {
    Eigen::Matrix2d m;
    m << 1 + lambda, 0, 0, 1;
    return dense(m);
  };
  const auto d = dlogkappa_dlambda(metric_at, 0.5, 1e-4);
  EXPECT_NEAR(d.d_lambda_max, 1.0, 1e-9);
  EXPECT_NEAR(d.d_lambda_min, 0.0, 1e-9);
  EXPECT_NEAR(d.value, 1.0 / 1.5, 1e-9);
  EXPECT_FALSE(d.ill_conditioned);
  EXPECT_TRUE(dlogkappa_dlambda(metric_at, 0.0, 1e-4).ill_conditioned);
}

TEST(DLogKappaProperty, MatchesFiniteDifferenceOfLogKappa) {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 3 + trial % 6;
    const Eigen::MatrixXd a = oracle::random_psd(rng, n, 0.1);
    const Eigen::MatrixXd b = oracle::random_symmetric(rng, n);
    const auto metric_at = [&](double t) { return dense(a + t * b); };
    const auto d = dlogkappa_dlambda(metric_at, 0.0, 1e-6);
    if (d.ill_conditioned) continue;
    const auto lk = [&](double t) {
      return spectral_summary(eigh_symmetric(metric_at(t)), 1e-10).log_kappa;
    };
    const double h = 1e-5;
    EXPECT_NEAR(d.value, (lk(h) - lk(-h)) / (2 * h), 1e-5 * std::max(1.0, std::abs(d.value)));
  }
}

}  // namespace
}  // namespace sculpt
