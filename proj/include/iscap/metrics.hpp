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

#include <vector>

#include "iscap/covariance.hpp"
#include "iscap/scenario.hpp"
#include "iscap/solution.hpp"

namespace iscap {

/// Channels and echo weights of a scenario, computed once.
struct ChannelTable {
  /// cu[l][k] = h_l(p_{c_k})
  std::vector<std::vector<ComplexVector>> cu;
  /// sense[l][m] = h_l(p_{s_m})
  std::vector<std::vector<ComplexVector>> sense;
  /// echo_weight[l][m] = |zeta|^2 * sum_n lambda^2 / (16 pi^2 r_{n,l,m}^2)
  std::vector<std::vector<double>> echo_weight;

  static ChannelTable build(const Scenario& s);
};

/// SINR of CU k under the given receiver type. Throws DomainError on a bad index.
double sinr(const BeamformingSolution& sol, const Scenario& s, int cu, CuType type);
double sinr(const BeamformingSolution& sol, const Scenario& s, const ChannelTable& ch, int cu,
            CuType type);

/// eta * sum_l tr(G_{l,e_k} (w_l w_l^H + R_l)).
double avg_harvested_power(const BeamformingSolution& sol, const Scenario& s,
                           const CovarianceSet& gset, int er);

/// Direct-link echo statistic phi_m at sensing point m.
double echo_power(const BeamformingSolution& sol, const Scenario& s, int m);
double echo_power(const BeamformingSolution& sol, const ChannelTable& ch, int m);

/// Q(Q^{-1}(P_FA) - sqrt(2 phi / sigma_s^2)).
double detection_probability(double phi, double noise_sense, double false_alarm);

struct WorstCaseDetection {
  double probability = 0.0;
  int index = 0;  // lowest index among ties
  double echo = 0.0;
};

WorstCaseDetection worst_case_detection(const BeamformingSolution& sol, const Scenario& s);
WorstCaseDetection worst_case_detection(const BeamformingSolution& sol, const Scenario& s,
                                        const ChannelTable& ch);

/// h_k(p)^H (w_k w_k^H + R_k) h_k(p): power received at p from BS k alone.
double received_power(const BeamformingSolution& sol, const Scenario& s, int bs, const Point2D& p);

/// Everything a report row needs about one solution.
struct MetricsSummary {
  std::vector<double> sinr;      // under each CU's own type
  std::vector<double> harvested;  // W
  std::vector<double> echo;       // phi_m
  std::vector<double> transmit_power;
  WorstCaseDetection detection;
};

MetricsSummary evaluate(const BeamformingSolution& sol, const Scenario& s, const CovarianceSet& gset);

}  // namespace iscap
