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

#include "sculpt/spectral.hpp"

#include <limits>

namespace sculpt {

EigenDecomposition eigh_symmetric(const MetricTensor& g) {
  const Eigen::MatrixXd& a = g.entries;
  if (a.rows() != a.cols()) throw DimensionError("eigh_symmetric: not square");
  const double asym = a.size() == 0 ? 0.0 : (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8) {
    throw ContractViolation("eigh_symmetric: input asymmetric by " +
                            std::to_string(asym));
  }
  if (!g.block_diagonal()) return jacobi_eigh(a);

  const Eigen::Index n = a.rows();
  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Eigen::MatrixXd::Zero(n, n);
  Eigen::Index col = 0;
  std::vector<bool> covered(n, false);
  for (const auto& block : g.blocks) {
    const auto m = static_cast<Eigen::Index>(block.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = a(block[i], block[j]);
    const EigenDecomposition part = jacobi_eigh(sub);
    out.sweeps = std::max(out.sweeps, part.sweeps);
    for (Eigen::Index k = 0; k < m; ++k, ++col) {
      out.eigenvalues(col) = part.eigenvalues(k);
      for (Eigen::Index i = 0; i < m; ++i) {
        out.eigenvectors(block[i], col) = part.eigenvectors(i, k);
      }
    }
    for (int idx : block) covered[idx] = true;
  }
  if (col != n || std::find(covered.begin(), covered.end(), false) != covered.end()) {
    throw ContractViolation("eigh_symmetric: blocks do not partition the metric");
  }
  detail::sort_descending(out);
  return out;
}

SpectralSummary spectral_summary(const EigenDecomposition& eig, double epsilon,
                                 double degeneracy_threshold) {
  if (!(epsilon > 0)) throw ContractViolation("spectral_summary: epsilon must be > 0");
  const Eigen::VectorXd& ev = eig.eigenvalues;
  SpectralSummary s;
  s.num_eigenvalues = static_cast<int>(ev.size());
  s.epsilon_floor = epsilon;
  s.epsilon_degenerate = degeneracy_threshold;

  std::vector<double> kept;
  int below_degen = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) >= epsilon) kept.push_back(ev(i));
    if (ev(i) < degeneracy_threshold) ++below_degen;
  }
  s.num_retained = static_cast<int>(kept.size());
  s.num_filtered = s.num_eigenvalues - s.num_retained;
  s.degenerate = below_degen > 0.5 * s.num_eigenvalues;
  if (kept.empty()) {
    throw DegenerateSpectrumError(
        "all " + std::to_string(s.num_eigenvalues) +
        " metric eigenvalues are below epsilon (possible barren plateau)");
  }
  s.lambda_min_raw = ev.size() ? ev.minCoeff() : 0.0;
  s.lambda_max = *std::max_element(kept.begin(), kept.end());
  s.lambda_min = *std::min_element(kept.begin(), kept.end());
  s.kappa = s.lambda_max / s.lambda_min;
  s.log_kappa = std::log(s.lambda_max) - std::log(s.lambda_min);

  double trace = 0;
  for (double l : kept) trace += l;
  double entropy = 0, purity = 0, log_vol = 0;
  for (double l : kept) {
    const double p = l / trace;
    entropy -= p * std::log(p);
    purity += p * p;
    log_vol += 0.5 * std::log(l);
  }
  s.trace = trace;
  s.entropy = entropy;
  s.effective_dim = 1.0 / purity;
  s.log_volume = log_vol;
  s.volume = std::exp(log_vol);
  s.pac_surrogate = trace / s.lambda_min;
  s.pac_upper_bound = s.num_retained * s.kappa;
  return s;
}

double contraction_factor(double kappa) {
  if (!(kappa >= 1.0)) {
    throw ContractViolation("contraction_factor: kappa must be >= 1");
  }
  const double r = (kappa - 1.0) / (kappa + 1.0);
  return r * r;
}

Eigen::VectorXd natural_gradient(const MetricTensor& g, const Eigen::VectorXd& grad,
                                 double ridge) {
  if (grad.size() != g.dim()) {
    throw DimensionError("natural_gradient: gradient length mismatch");
  }
  if (ridge < 0) throw ContractViolation("natural_gradient: ridge must be >= 0");
  const EigenDecomposition eig = eigh_symmetric(g);
  if (grad.size() == 0) return grad;
  const Eigen::VectorXd shifted = eig.eigenvalues.array() + ridge;
  const double lo = shifted.minCoeff();
  const double hi = shifted.maxCoeff();
  if (!(lo > 1e-10)) {
    throw SingularMetricError("natural_gradient: metric is singular (min shifted "
                              "eigenvalue " + std::to_string(lo) + ")");
  }
  const Eigen::VectorXd coeffs =
      (eig.eigenvectors.transpose() * grad).cwiseQuotient(shifted);
  Eigen::VectorXd u = eig.eigenvectors * coeffs;

  const double gn = grad.norm();
  const double un = u.norm();
  const double slack = 1e-8 * std::max(gn / lo, std::numeric_limits<double>::min());
  if (un < gn / hi - slack || un > gn / lo + slack) {
    throw NumericalError("natural_gradient: norm bounds violated");
  }
  return u;
}

LogKappaDerivative dlogkappa_dlambda(
    const std::function<MetricTensor(double)>& metric_at, double lambda0,
    double h, double epsilon) {
  if (!(h > 0)) throw ContractViolation("dlogkappa_dlambda: h must be > 0");
  const MetricTensor g0 = metric_at(lambda0);
  const MetricTensor gp = metric_at(lambda0 + h);
  const MetricTensor gm = metric_at(lambda0 - h);
  const Eigen::MatrixXd dg = (gp.entries - gm.entries) / (2.0 * h);
  const EigenDecomposition eig = eigh_symmetric(g0);
  const Eigen::VectorXd& ev = eig.eigenvalues;

  Eigen::Index imin = -1;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) >= epsilon) imin = i;
  }
  if (imin < 0) {
    throw DegenerateSpectrumError("dlogkappa_dlambda: no eigenvalue above epsilon");
  }
  const Eigen::Index imax = 0;

  LogKappaDerivative out;
  out.lambda_max = ev(imax);
  out.lambda_min = ev(imin);
  const Eigen::VectorXd vmax = eig.eigenvectors.col(imax);
  const Eigen::VectorXd vmin = eig.eigenvectors.col(imin);
  out.d_lambda_max = vmax.dot(dg * vmax);
  out.d_lambda_min = vmin.dot(dg * vmin);
  out.value = out.d_lambda_max / out.lambda_max - out.d_lambda_min / out.lambda_min;

  const double gap_tol = 1e-6 * g0.entries.norm();
  auto near = [&](Eigen::Index i) {
    bool close = false;
    if (i > 0) close |= std::abs(ev(i) - ev(i - 1)) <= gap_tol;
    if (i + 1 < ev.size()) close |= std::abs(ev(i) - ev(i + 1)) <= gap_tol;
    return close;
  };
  out.ill_conditioned = near(imax) || near(imin);
  return out;
}

}  // namespace sculpt
