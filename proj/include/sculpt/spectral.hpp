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

/// Symmetric eigendecomposition and the diagnostics derived from a metric
/// spectrum: condition number, spectral entropy, effective dimension,
/// volume element, complexity surrogate, degeneracy flag, contraction factor,
/// natural-gradient preconditioning and eigenvalue perturbation derivatives.
///
/// All logarithms are natural.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sculpt/errors.hpp"
#include "sculpt/fsmetric.hpp"

namespace sculpt {

template <typename Scalar>
struct BasicEigenDecomposition {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // column i belongs to eigenvalues(i)
  int sweeps = 0;
};

using EigenDecomposition = BasicEigenDecomposition<double>;

namespace detail {

/// Sorts eigenpairs by descending eigenvalue; equal values keep input order.
template <typename Scalar>
void sort_descending(BasicEigenDecomposition<Scalar>& eig) {
  const auto n = eig.eigenvalues.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return eig.eigenvalues(a) > eig.eigenvalues(b);
  });
  typename BasicEigenDecomposition<Scalar>::Vector values(n);
  typename BasicEigenDecomposition<Scalar>::Matrix vectors(eig.eigenvectors.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    values(i) = eig.eigenvalues(order[i]);
    vectors.col(i) = eig.eigenvectors.col(order[i]);
  }
  eig.eigenvalues = std::move(values);
  eig.eigenvectors = std::move(vectors);
}

}  // namespace detail

/// Cyclic Jacobi sweeps over the upper triangle until the largest
/// off-diagonal magnitude is <= rel_tol * ||A||_F, or `max_sweeps` is hit.
/// Only the upper triangle's symmetric counterpart is assumed; callers check
/// symmetry.
template <typename Derived>
BasicEigenDecomposition<typename Derived::Scalar> jacobi_eigh(
    const Eigen::MatrixBase<Derived>& input,
    typename Derived::Scalar rel_tol = typename Derived::Scalar(1e-12),
    int max_sweeps = 100) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (input.rows() != input.cols()) {
    throw DimensionError("jacobi_eigh: matrix must be square");
  }
  const Eigen::Index n = input.rows();
  Matrix a = input;
  Matrix v = Matrix::Identity(n, n);
  const Scalar threshold = rel_tol * a.norm();

  auto max_off_diagonal = [&] {
    Scalar m(0);
    for (Eigen::Index q = 1; q < n; ++q)
      for (Eigen::Index p = 0; p < q; ++p) m = std::max(m, std::abs(a(p, q)));
    return m;
  };

  int sweep = 0;
  while (sweep < max_sweeps && max_off_diagonal() > threshold) {
    ++sweep;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar tau = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (tau >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                         (std::abs(tau) + std::sqrt(Scalar(1) + tau * tau));
        const Scalar c = Scalar(1) / std::sqrt(Scalar(1) + t * t);
        const Scalar s = t * c;
        // A <- J^T A J with J = [[c, s], [-s, c]] in the (p, q) plane.
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = Scalar(0);
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  BasicEigenDecomposition<Scalar> eig;
  eig.eigenvalues = a.diagonal();
  eig.eigenvectors = std::move(v);
  eig.sweeps = sweep;
  detail::sort_descending(eig);
  return eig;
}

/// Eigendecomposition of a metric; block-diagonal metrics are decomposed one
/// block at a time and merged. Throws ContractViolation when max|G - G^T| > 1e-8.
EigenDecomposition eigh_symmetric(const MetricTensor& g);

struct SpectralSummary {
  double lambda_min = 0;      // smallest retained eigenvalue (used for kappa)
  double lambda_min_raw = 0;  // smallest eigenvalue before filtering
  double lambda_max = 0;
  double kappa = 1;
  double log_kappa = 0;
  double entropy = 0;  // nats
  double effective_dim = 1;
  double volume = 0;      // sqrt(prod retained eigenvalues)
  double log_volume = 0;  // 0.5 * sum log(retained eigenvalues)
  double trace = 0;       // sum of retained eigenvalues
  double pac_surrogate = 0;    // trace / lambda_min
  double pac_upper_bound = 0;  // retained count * kappa
  bool degenerate = false;
  int num_filtered = 0;
  int num_retained = 0;
  int num_eigenvalues = 0;
  double epsilon_floor = 0;
  double epsilon_degenerate = 0;
};

/// Eigenvalues below `epsilon` are discarded before kappa, entropy,
/// effective dimension, volume and the surrogate are formed. The spectrum is
/// flagged degenerate when more than half of all eigenvalues fall below
/// `degeneracy_threshold`. Throws DegenerateSpectrumError when nothing is
/// retained.
SpectralSummary spectral_summary(const EigenDecomposition& eig, double epsilon,
                                 double degeneracy_threshold);

inline SpectralSummary spectral_summary(const EigenDecomposition& eig,
                                        double epsilon) {
  return spectral_summary(eig, epsilon, epsilon);
}

/// ((kappa - 1) / (kappa + 1))^2.
double contraction_factor(double kappa);

/// Solves (G + ridge I) u = grad through the eigendecomposition and checks
/// ||grad||/lambda_max <= ||u|| <= ||grad||/lambda_min on the shifted spectrum.
Eigen::VectorXd natural_gradient(const MetricTensor& g, const Eigen::VectorXd& grad,
                                 double ridge);

struct LogKappaDerivative {
  double value = 0;
  double d_lambda_max = 0;
  double d_lambda_min = 0;
  double lambda_max = 0;
  double lambda_min = 0;
  /// An extreme eigenvalue is within 1e-6 ||G||_F of its neighbour, so
  /// first-order perturbation theory is unreliable there.
  bool ill_conditioned = false;
};

/// d log kappa / d lambda via d lambda_i = v_i^T (dG/d lambda) v_i, with dG/d
/// lambda from a central difference of step h. Extremes are taken over the
/// eigenvalues >= epsilon.
LogKappaDerivative dlogkappa_dlambda(
    const std::function<MetricTensor(double)>& metric_at, double lambda0,
    double h, double epsilon = 1e-10);

}  // namespace sculpt
