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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iscap/conic.hpp"
#include "iscap/covariance.hpp"
#include "iscap/scenario.hpp"
#include "iscap/solution.hpp"

namespace iscap {

inline constexpr double kDefaultSdpTol = 1e-8;

enum class RowSense { GreaterEqual, LessEqual };
enum class RowKind { Sensing, Sinr, Harvest, Power };

/// sum_j tr(C_j X_j) + theta * Theta  (>= or <=)  rhs, over Hermitian blocks.
struct ConicRow {
  RowKind kind = RowKind::Sensing;
  int index = 0;  // sensing point, CU or ER index, or BS for power rows
  std::string label;
  std::vector<std::pair<int, HermitianMatrix>> terms;
  double theta = 0.0;
  RowSense sense = RowSense::GreaterEqual;
  double rhs = 0.0;
};

/// maximize Theta over Hermitian PSD blocks {W_k, R_k} subject to `rows`.
/// W_k is block 2k and R_k is block 2k + 1.
struct ConicProblem {
  int num_bs = 0;
  int dim = 0;
  std::vector<CuType> cu_types;
  std::vector<ConicRow> rows;
  /// Block values are solved in units of power_scale (P_max) and Theta in
  /// units of theta_scale, which keeps the embedded problem well scaled.
  double power_scale = 1.0;
  double theta_scale = 1.0;

  static int info_block(int k) { return 2 * k; }
  static int dual_block(int k) { return 2 * k + 1; }
  int num_blocks() const { return 2 * num_bs; }
  /// PSD blocks plus the scalar Theta.
  int variable_count() const { return num_blocks() + 1; }
  int constraint_count() const { return static_cast<int>(rows.size()); }

  /// Real-embedded standard form. LP coordinate 0 is Theta / theta_scale,
  /// coordinate 1 + i is the slack of row i; the objective minimizes -Theta.
  conic::Problem to_standard() const;
};

/// Relaxed problem for all CU types: rows in the order sensing (M), SINR (K), harvest (K),
/// power (K). Each CU uses its own type from the scenario.
ConicProblem build_sdr(const Scenario& s, const CovarianceSet& gset);
/// Same problem with every CU treated as `type`.
ConicProblem build_sdr(const Scenario& s, const CovarianceSet& gset, CuType type);

/// Variant whose harvest rows are pointwise: one row per (ER k, sample p),
/// eta * sum_l h_l(p)^H (W_l + R_l) h_l(p) >= Omega_k.
ConicProblem build_sdr_pointwise(const Scenario& s,
                                 const std::vector<std::vector<Point2D>>& er_samples);

struct SdpSolution {
  std::vector<HermitianMatrix> w;
  std::vector<HermitianMatrix> r;
  double theta = 0.0;
  SolveReport report;
};

/// Solves the relaxation with the embedded interior-point method.
/// `report.activities` holds one entry per row of the relaxed problem.
SdpSolution solve_sdp(const ConicProblem& p, double tol = kDefaultSdpTol);

struct RankOneParts {
  ComplexVector beam;
  HermitianMatrix dual;
};

/// w = W h / sqrt(h^H W h), R' = W + R - w w^H. Throws DegenerateSolution if
/// h^H W h is not positive relative to ||W|| ||h||^2.
RankOneParts extract_rank_one(const HermitianMatrix& w, const HermitianMatrix& r,
                              const ComplexVector& h);
RankOneParts extract_rank_one(const HermitianMatrix& w, const HermitianMatrix& r,
                              const Scenario& s, int k);

/// Moves the part of R_k seen by its own CU into W_k: u = R h / sqrt(h^H R h),
/// W += u u^H, R -= u u^H. Leaves every Type-I and Type-II constraint value
/// unchanged or improved and zeroes h^H R h.
void remove_intra_cell_leakage(HermitianMatrix& w, HermitianMatrix& r, const ComplexVector& h);

/// Relative feasibility of a candidate against the unrelaxed problem with
/// averaged harvest. Slacks are relative: (value - target) / target.
struct FeasibilityCheck {
  std::vector<ConstraintActivity> rows;
  double max_violation = 0.0;   // largest negative relative slack, as a positive number
  double min_echo = 0.0;        // min_m phi_m
  double max_psd_residual = 0.0;  // over R_k, relative to P_max
};

FeasibilityCheck check_unrelaxed(const BeamformingSolution& sol, const Scenario& s,
                                 const CovarianceSet& gset, double theta);

struct SdrOutcome {
  BeamformingSolution solution;
  SdpSolution relaxed;
  /// min_m phi_m of the rank-one solution.
  double reconstructed_objective = 0.0;
  FeasibilityCheck check;
  /// h_{k,c_k}^H R_k h_{k,c_k} of the relaxed solution before any leakage removal.
  std::vector<double> raw_leakage;
};

/// Coordinated SDR design with rank-one reconstruction. For Type-I and
/// Type-II users intra-cell leakage is removed before extraction.
/// If the relaxation is not optimal the returned solution is all zero and
/// `solution.report` carries the status.
SdrOutcome solve_coordinated(const Scenario& s, const CovarianceSet& gset,
                             double tol = kDefaultSdpTol);

/// Every BS designs alone: its CU, its ER (own G only), every sensing point
/// (own echo only), no inter-cell terms. Per-BS failures are listed in the
/// report message.
BeamformingSolution solve_noncoordinated(const Scenario& s, const CovarianceSet& gset,
                                         double tol = kDefaultSdpTol);

/// 3 x 3 grid of the disc's bounding square with corners projected radially
/// onto the circle. A point region yields its center only.
std::vector<Point2D> worst_case_samples(const UncertaintyRegion& region, int sample_count = 9);

/// Worst-case robust baseline: pointwise harvest rows at worst_case_samples.
SdrOutcome solve_worstcase_robust(const Scenario& s, const CovarianceSet& gset,
                                  int sample_count = 9, double tol = kDefaultSdpTol);

struct CorollaryReport {
  double theta_type1 = 0.0;
  double theta_type2 = 0.0;
  double theta_type3 = 0.0;
  double relative_gap = 0.0;  // |Theta_I - Theta_II| / max(Theta_I, 1e-12)
  /// Leakage of the returned Type-I solution, and relative to tr(R) ||h||^2.
  std::vector<double> leakage;
  std::vector<double> leakage_relative;
  /// Same quantities for the raw relaxed optimum.
  std::vector<double> raw_leakage_relative;
  bool all_optimal = false;
};

CorollaryReport verify_corollary(const Scenario& s, const CovarianceSet& gset,
                                 double tol = kDefaultSdpTol);

}  // namespace iscap
