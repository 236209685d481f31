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

#include "iscap/solution.hpp"

namespace iscap {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::SDR: return "SDR";
    case Provenance::MRT: return "MRT";
    case Provenance::MRTAsymptotic: return "MRT-asymptotic";
    case Provenance::NonCoordinated: return "NonCoordinated";
    case Provenance::WorstCaseRobust: return "WorstCaseRobust";
    case Provenance::Manual: return "Manual";
  }
  return "unknown";
}

double BeamformingSolution::transmit_power(int k) const {
  const auto i = static_cast<std::size_t>(k);
  return info_beams[i].squaredNorm() + dual_covariances[i].trace().real();
}

HermitianMatrix BeamformingSolution::total_covariance(int k) const {
  const auto i = static_cast<std::size_t>(k);
  return info_beams[i] * info_beams[i].adjoint() + dual_covariances[i];
}

BeamformingSolution BeamformingSolution::zero(int k, int n) {
  BeamformingSolution out;
  out.info_beams.assign(static_cast<std::size_t>(k), ComplexVector::Zero(n));
  out.dual_covariances.assign(static_cast<std::size_t>(k), HermitianMatrix::Zero(n, n));
  return out;
}

}  // namespace iscap
