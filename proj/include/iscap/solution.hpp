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
#include <vector>

#include "iscap/numerics.hpp"

namespace iscap {

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

const char* to_string(SolveStatus s);

/// Value of one constraint row at the returned point. For ">=" rows the slack
/// is lhs - rhs; for "<=" rows it is rhs - lhs. Negative slack is violation.
struct ConstraintActivity {
  std::string label;
  double slack = 0.0;
  /// Magnitude of the row's terms, used to express slack relatively.
  double scale = 1.0;
  bool active = false;
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;  // Theta in W (echo-power units)
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  std::vector<ConstraintActivity> activities;
  /// Numerical rank of each W_k at 1e-6 relative eigenvalue cutoff (SDR only).
  std::vector<int> info_ranks;
  double seconds = 0.0;
  /// Infeasibility certificate summary or failure reason.
  std::string message;
  /// Set for closed-form MRT outputs that rely on the large-array limit.
  bool asymptotic_approximation = false;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

enum class Provenance { SDR, MRT, MRTAsymptotic, NonCoordinated, WorstCaseRobust, Manual };

const char* to_string(Provenance p);

/// Per-BS information beam and dual-purpose covariance.
struct BeamformingSolution {
  std::vector<ComplexVector> info_beams;
  std::vector<HermitianMatrix> dual_covariances;
  Provenance provenance = Provenance::Manual;
  std::optional<SolveReport> report;

  int num_bs() const { return static_cast<int>(info_beams.size()); }
  /// ||w_k||^2 + tr(R_k).
  double transmit_power(int k) const;
  /// w_k w_k^H + R_k.
  HermitianMatrix total_covariance(int k) const;

  /// All-zero solution for K arrays of N elements.
  static BeamformingSolution zero(int k, int n);
};

}  // namespace iscap
