// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "iscap/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "iscap/error.hpp"

namespace iscap {

double q_function(double x) {
  if (!std::isfinite(x)) throw DomainError("q_function: non-finite argument");
  double q = 0.5 * std::erfc(x / std::numbers::sqrt2);
  if (q <= 0.0) q = std::numeric_limits<double>::denorm_min();
  return q;
}

namespace {

// Acklam's rational approximation to the standard normal quantile; relative
// error about 1.15e-9, used only as the Newton starting point.
double normal_quantile_guess(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("q_inverse: probability must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  // Q^{-1}(p) = Phi^{-1}(1 - p) = -Phi^{-1}(p)
  double x = -normal_quantile_guess(p);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (int it = 0; it < 8; ++it) {
    const double err = 0.5 * std::erfc(x / std::numbers::sqrt2) - p;
    const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
    if (pdf <= 0.0) break;
    // Q'(x) = -pdf(x)
    const double step = err / pdf;
    x += step;
    if (std::abs(step) <= 1e-12 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

double hermitian_defect(const HermitianMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

void require_hermitian(const HermitianMatrix& m, const char* what, double tol) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw ContractViolation(std::string(what) + ": matrix must be square and non-empty");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (hermitian_defect(m) > tol * scale)
    throw ContractViolation(std::string(what) + ": matrix is not Hermitian");
}

HermitianMatrix symmetrized(const HermitianMatrix& m) { return 0.5 * (m + m.adjoint()); }

Eigenpair principal_eigenpair(const HermitianMatrix& m) {
  require_hermitian(m, "principal_eigenpair");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(symmetrized(m));
  if (es.info() != Eigen::Success) throw ContractViolation("principal_eigenpair: eigensolver failed");
  const auto& vals = es.eigenvalues();
  const Eigen::Index n = vals.size();
  const double top = vals(n - 1);
  const double spread = std::max({std::abs(vals(0)), std::abs(top), 1e-300});

  // Eigenspace of the top eigenvalue (ascending order from Eigen).
  Eigen::Index first = n - 1;
  while (first > 0 && top - vals(first - 1) <= 1e-10 * spread) --first;

  ComplexVector v;
  if (first == n - 1) {
    v = es.eigenvectors().col(n - 1);
  } else {
    const Eigen::MatrixXcd basis = es.eigenvectors().rightCols(n - first);
    for (Eigen::Index j = 0; j < n; ++j) {
      // projection of e_j onto span(basis)
      ComplexVector proj = basis * basis.row(j).adjoint();
      if (proj.norm() > 1e-8) {
        v = proj;
        break;
      }
    }
  }
  v.normalize();

  const double largest = v.cwiseAbs().maxCoeff();
  Eigen::Index idx = 0;
  while (std::abs(v(idx)) < largest * (1.0 - 1e-12)) ++idx;
  v *= std::conj(v(idx)) / std::abs(v(idx));
  v(idx) = Complex(std::abs(v(idx)), 0.0);
  return {top, v};
}

double psd_residual(const HermitianMatrix& m) {
  require_hermitian(m, "psd_residual", 1e-9);
  if (m.isZero(0.0)) return 0.0;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(symmetrized(m),
                                                           Eigen::EigenvaluesOnly);
  return std::max(0.0, -es.eigenvalues()(0));
}

int numerical_rank(const HermitianMatrix& m, double rel_cutoff) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(symmetrized(m),
                                                           Eigen::EigenvaluesOnly);
  const auto& vals = es.eigenvalues();
  const double top = vals(vals.size() - 1);
  if (top <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals(i) > rel_cutoff * top) ++rank;
  return rank;
}

double trace_product(const HermitianMatrix& a, const HermitianMatrix& b) {
  // tr(AB) = sum_ij A_ij B_ji
  return (a.array() * b.transpose().array()).sum().real();
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  // Newton on P_n from the Chebyshev-like initial guess; nodes symmetric.
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }
double db_to_ratio(double db) { return std::pow(10.0, db / 10.0); }
double ratio_to_db(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace iscap
