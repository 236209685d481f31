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

#include <utility>
#include <vector>

#include "iscap/covariance.hpp"
#include "iscap/scenario.hpp"
#include "iscap/solution.hpp"

namespace iscap {

/// Fixed per-BS transmit directions of the MRT design.
struct BeamDirections {
  std::vector<ComplexVector> info;     // h_{k,c_k} / ||h_{k,c_k}||
  std::vector<ComplexVector> energy;   // principal eigenvector of G_{k,e_k}
  std::vector<ComplexVector> sensing;  // principal eigenvector of A_k
  /// A_k = (1/M) sum_m c_{k,m} h* h^T, the averaged round-trip matrix.
  std::vector<HermitianMatrix> round_trip;
};

BeamDirections beam_directions(const Scenario& s, const CovarianceSet& gset);

struct PowerAllocation {
  std::vector<double> rho_c;
  std::vector<double> rho_e;
  std::vector<double> rho_s;
  double theta = 0.0;  // W
};

/// MRT power allocation as an LP in the 3K powers and Theta, per each CU's own type.
/// The sensing rows sum the echo contributions of every BS.
std::pair<PowerAllocation, SolveReport> build_and_solve_lp(const Scenario& s,
                                                           const CovarianceSet& gset,
                                                           const BeamDirections& dirs,
                                                           double tol = 1e-9);

/// Large-array closed form: rho_c = Gamma sigma^2 / ||h||^2,
/// rho_e = (Omega / eta) / (nu_e^H G nu_e), rho_s = P - rho_c - rho_e.
/// `theta` is left at 0; evaluate the resulting solution to obtain it.
PowerAllocation closed_form_asymptotic(const Scenario& s, const CovarianceSet& gset,
                                       const BeamDirections& dirs);

/// rho_c <= P, rho_e <= P and rho_c + rho_e <= P for every BS.
bool asymptotic_feasible(const PowerAllocation& a, double p_max);

/// w_k = sqrt(rho_c) info_k, R_k = rho_e nu_e nu_e^H + rho_s nu_s nu_s^H.
/// Negative powers are rejected with ContractViolation.
BeamformingSolution to_solution(const PowerAllocation& a, const BeamDirections& dirs,
                                Provenance provenance = Provenance::MRT);

struct MrtOutcome {
  BeamformingSolution solution;
  PowerAllocation allocation;
  BeamDirections directions;
};

/// Directions + LP; the solution is all zero unless the LP is optimal.
MrtOutcome solve_mrt(const Scenario& s, const CovarianceSet& gset, double tol = 1e-9);

/// Directions + closed form. The report status is Infeasible when the
/// closed-form screen fails; `asymptotic_approximation` is always set.
MrtOutcome solve_mrt_asymptotic(const Scenario& s, const CovarianceSet& gset);

}  // namespace iscap
