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
#include <string>
#include <utility>
#include <vector>

#include "iscap/numerics.hpp"
#include "iscap/solution.hpp"

namespace iscap::conic {

/// Standard primal form over a product of real symmetric PSD blocks and one
/// nonnegative orthant:
///
///   minimize <C, X>  subject to  <A_i, X> = b_i,  X in S+^{n_1} x ... x R+^{p}
///
/// with dual  maximize b^T y  subject to  C - sum_i y_i A_i = Z in the same cone.
struct Problem {
  struct Row {
    /// (block index, symmetric coefficient matrix). Absent blocks are zero.
    std::vector<std::pair<int, Eigen::MatrixXd>> psd;
    /// (orthant coordinate, coefficient).
    std::vector<std::pair<int, double>> lp;
  };

  std::vector<int> psd_dims;
  int lp_dim = 0;
  /// One matrix per PSD block; an empty matrix means zero.
  std::vector<Eigen::MatrixXd> c_psd;
  Eigen::VectorXd c_lp;
  std::vector<Row> rows;
  Eigen::VectorXd b;

  int num_rows() const { return static_cast<int>(rows.size()); }
  /// Throws ContractViolation on inconsistent dimensions or asymmetric data.
  void validate() const;
};

struct Options {
  /// Relative primal infeasibility, dual infeasibility and gap must all fall
  /// below this for an optimal status.
  double tol = 1e-8;
  int max_iterations = 120;
  /// Fraction of the distance to the cone boundary taken per step.
  double step_fraction = 0.95;
  /// Threshold on the normalized Farkas residual for declaring infeasibility.
  double infeasibility_tol = 1e-8;
  /// If the iteration stalls or breaks down, the best iterate is still
  /// reported optimal when its residuals are all below this.
  double fallback_tol = 1e-6;
};

struct Result {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<Eigen::MatrixXd> x_psd;
  Eigen::VectorXd x_lp;
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> z_psd;
  Eigen::VectorXd z_lp;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;  // ||b - A(X)|| / (1 + ||b||), equilibrated
  double dual_residual = 0.0;    // ||C - A*(y) - Z|| / (1 + ||C||), equilibrated
  double gap = 0.0;              // relative duality gap
  int iterations = 0;
  std::string message;
};

/// Primal-dual interior-point method with the HKM search direction and
/// Mehrotra predictor-corrector steps. Rows are equilibrated internally;
/// returned quantities refer to the caller's scaling. Deterministic.
Result solve(const Problem& p, const Options& opt = {});

/// Real symmetric embedding [[Re A, -Im A], [Im A, Re A]] of a Hermitian matrix.
/// <embed(A), embed(X)> = 2 Re tr(A X).
Eigen::MatrixXd embed(const HermitianMatrix& a);

/// Hermitian matrix represented by a 2N x 2N symmetric block Y:
/// ((Y11 + Y22) + i (Y21 - Y12)) / 2. For every Hermitian A,
/// <embed(A), Y> / 2 = Re tr(A * extract(Y)), and extract preserves PSD.
HermitianMatrix extract(const Eigen::MatrixXd& y);

/// Frobenius inner product.
double inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace iscap::conic
