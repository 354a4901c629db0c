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

// Independent reference implementations and random generators for tests.
// Nothing here calls into the library's simulator or metric code.

#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline Eigen::Matrix2cd pauli(char p) {
  Eigen::Matrix2cd m;
  switch (p) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m.setIdentity();
  }
  return m;
}

/// exp(-i angle P / 2) = cos(a/2) I - i sin(a/2) P.
inline Eigen::Matrix2cd rotation(char p, double angle) {
  return std::cos(angle / 2) * Eigen::Matrix2cd::Identity() -
         Complex(0, std::sin(angle / 2)) * pauli(p);
}

/// Embeds a one-qubit operator; qubit 0 is the least significant bit.
inline Matrix embed(const Eigen::Matrix2cd& u, int target, int n) {
  Matrix out = Matrix::Identity(1, 1);
  for (int q = n - 1; q >= 0; --q) {
    const Eigen::Matrix2cd f = q == target ? u : Eigen::Matrix2cd::Identity();
    Matrix next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        next.block(2 * i, 2 * j, 2, 2) = out(i, j) * f;
    out = next;
  }
  return out;
}

inline Matrix cnot(int control, int target, int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  Matrix m = Matrix::Zero(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const Eigen::Index i = ((j >> control) & 1) ? (j ^ (Eigen::Index{1} << target)) : j;
    m(i, j) = 1;
  }
  return m;
}

struct Gate {
  char axis;     // 'X', 'Y', 'Z' rotation, or 'C' for CNOT
  int target;
  int control;   // CNOT only
  double angle;
  int param;     // -1 for fixed gates
};

/// The layered circuit written out from its textual description.
inline std::vector<Gate> ansatz(int n, int layers, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& theta, double rz_scale = 0.01) {
  std::vector<Gate> gates;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    gates.push_back({'X', static_cast<int>(i % n), -1, x(i), -1});
    gates.push_back({'Z', static_cast<int>(i % n), -1, rz_scale * x(i), -1});
  }
  const char axes[3] = {'X', 'Y', 'Z'};
  for (int l = 0; l < layers; ++l) {
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < 3; ++r) {
        const int k = l * 3 * n + q * 3 + r;
        gates.push_back({axes[r], q, -1, theta(k), k});
      }
    if (n > 1)
      for (int q = 0; q < n; ++q) gates.push_back({'C', (q + 1) % n, q, 0, -1});
  }
  return gates;
}

inline Matrix unitary(const Gate& g, int n) {
  return g.axis == 'C' ? cnot(g.control, g.target, n)
                       : embed(rotation(g.axis, g.angle), g.target, n);
}

inline Vector zero_state(int n) {
  Vector v = Vector::Zero(Eigen::Index{1} << n);
  v(0) = 1;
  return v;
}

inline Vector run(const std::vector<Gate>& gates, int n) {
  Vector v = zero_state(n);
  for (const auto& g : gates) v = unitary(g, n) * v;
  return v;
}

/// Exact derivative states from dense products: U_post (-i/2 P) U_k U_pre |0>.
inline std::vector<Vector> derivatives(const std::vector<Gate>& gates, int n, int p) {
  std::vector<Vector> d(p);
  for (std::size_t k = 0; k < gates.size(); ++k) {
    if (gates[k].param < 0) continue;
    Vector v = zero_state(n);
    for (std::size_t i = 0; i < gates.size(); ++i) {
      v = unitary(gates[i], n) * v;
      if (i == k) v = Complex(0, -0.5) * (embed(pauli(gates[k].axis), gates[k].target, n) * v);
    }
    d[gates[k].param] = v;
  }
  return d;
}

/// G_ij = Re[<d_i|d_j> - <d_i|psi><psi|d_j>].
inline Eigen::MatrixXd fs_metric(const std::vector<Gate>& gates, int n, int p) {
  const Vector psi = run(gates, n);
  const auto d = derivatives(gates, n, p);
  Eigen::MatrixXd g(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      g(i, j) = (d[i].dot(d[j]) - d[i].dot(psi) * psi.dot(d[j])).real();
  return g;
}

// ---- random generators --------------------------------------------------

inline Eigen::VectorXd uniform_vector(std::mt19937_64& rng, Eigen::Index n, double lo,
                                      double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (auto& e : v) e = u(rng);
  return v;
}

inline Eigen::VectorXd normal_vector(std::mt19937_64& rng, Eigen::Index n, double sigma = 1) {
  std::normal_distribution<double> g(0, sigma);
  Eigen::VectorXd v(n);
  for (auto& e : v) e = g(rng);
  return v;
}

inline Vector random_state(std::mt19937_64& rng, int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  std::normal_distribution<double> g;
  Vector v(dim);
  for (auto& e : v) e = Complex(g(rng), g(rng));
  return v / v.norm();
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (auto& e : a.reshaped()) e = g(rng);
  return 0.5 * (a + a.transpose());
}

/// A A^T / n plus a small ridge: symmetric positive definite.
inline Eigen::MatrixXd random_psd(std::mt19937_64& rng, Eigen::Index n, double ridge = 1e-3) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (auto& e : a.reshaped()) e = g(rng);
  Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(n);
  s.diagonal().array() += ridge;
  return 0.5 * (s + s.transpose());
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0 ? 0 : (a - b).norm() / scale;
}

}  // namespace oracle
