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

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace iscap {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
/// Dense complex matrix expected to be conjugate-symmetric.
using HermitianMatrix = Eigen::MatrixXcd;

/// Absolute entrywise tolerance for the Hermitian contract.
inline constexpr double kHermitianTol = 1e-12;

/// Gaussian upper-tail probability Q(x). Throws DomainError on NaN/inf input.
/// Results that would underflow to zero are clamped to the smallest positive
/// double.
double q_function(double x);

/// Inverse of q_function on (0, 1). Throws DomainError outside the open interval.
double q_inverse(double p);

struct Eigenpair {
  double value;
  ComplexVector vector;
};

/// Largest eigenvalue with a unit eigenvector. Phase rule: the largest-magnitude
/// entry is real and nonnegative, lowest index wins ties. When the top
/// eigenvalue is repeated, the vector is the normalized projection of the first
/// basis vector that has a nonzero component in that eigenspace.
Eigenpair principal_eigenpair(const HermitianMatrix& m);

/// max(0, -lambda_min(m)).
double psd_residual(const HermitianMatrix& m);

/// Largest absolute deviation |m(a,b) - conj(m(b,a))|.
double hermitian_defect(const HermitianMatrix& m);

/// Throws ContractViolation if m is not square or not Hermitian within
/// `tol` (absolute, scaled by max(1, max|m|)).
void require_hermitian(const HermitianMatrix& m, const char* what,
                       double tol = kHermitianTol);

/// (m + m^H) / 2.
HermitianMatrix symmetrized(const HermitianMatrix& m);

/// Number of eigenvalues above rel_cutoff * lambda_max.
int numerical_rank(const HermitianMatrix& m, double rel_cutoff = 1e-6);

/// Real part of trace(a * b) without forming the product.
double trace_product(const HermitianMatrix& a, const HermitianMatrix& b);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(int n);

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);
double db_to_ratio(double db);
double ratio_to_db(double ratio);

}  // namespace iscap
