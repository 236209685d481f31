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

#include "iscap/metrics.hpp"

#include <cmath>
#include <string>

#include "iscap/error.hpp"

namespace iscap {

namespace {

// h^H X h for Hermitian X.
double quad_form(const HermitianMatrix& x, const ComplexVector& h) {
  return std::real(h.dot(x * h));
}

double beam_power(const ComplexVector& w, const ComplexVector& h) { return std::norm(h.dot(w)); }

void check_solution(const BeamformingSolution& sol, const Scenario& s) {
  const auto k = static_cast<std::size_t>(s.num_bs());
  if (sol.info_beams.size() != k || sol.dual_covariances.size() != k)
    throw ContractViolation("solution has " + std::to_string(sol.info_beams.size()) +
                            " beams for a scenario with " + std::to_string(k) + " base stations");
}

}  // namespace

ChannelTable ChannelTable::build(const Scenario& s) {
  ChannelTable t;
  const auto k = static_cast<std::size_t>(s.num_bs());
  const double zeta2 = s.params.rcs_magnitude * s.params.rcs_magnitude;
  t.cu.resize(k);
  t.sense.resize(k);
  t.echo_weight.resize(k);
  for (std::size_t l = 0; l < k; ++l) {
    const auto elems = element_positions(s.bs[l]);
    for (const auto& c : s.cus) t.cu[l].push_back(channel_vector(s.bs[l], elems, c.position));
    for (const auto& p : s.sensing.points) {
      t.sense[l].push_back(channel_vector(s.bs[l], elems, p));
      t.echo_weight[l].push_back(zeta2 * echo_path_weight(s.bs[l], p));
    }
  }
  return t;
}

double sinr(const BeamformingSolution& sol, const Scenario& s, const ChannelTable& ch, int cu,
            CuType type) {
  check_solution(sol, s);
  if (cu < 0 || cu >= s.num_bs()) throw DomainError("sinr: CU index out of range");
  const auto k = static_cast<std::size_t>(cu);
  const double desired = beam_power(sol.info_beams[k], ch.cu[k][k]);
  double denom = s.params.noise_comm;
  for (std::size_t l = 0; l < sol.info_beams.size(); ++l) {
    const ComplexVector& h = ch.cu[l][k];
    if (l != k) denom += beam_power(sol.info_beams[l], h);
    const bool dual_counted = (type == CuType::TypeI) || (type == CuType::TypeII && l != k);
    if (dual_counted) denom += quad_form(sol.dual_covariances[l], h);
  }
  return desired / denom;
}

double sinr(const BeamformingSolution& sol, const Scenario& s, int cu, CuType type) {
  return sinr(sol, s, ChannelTable::build(s), cu, type);
}

double avg_harvested_power(const BeamformingSolution& sol, const Scenario& s,
                           const CovarianceSet& gset, int er) {
  check_solution(sol, s);
  if (er < 0 || er >= s.num_bs()) throw DomainError("avg_harvested_power: ER index out of range");
  double total = 0.0;
  for (int l = 0; l < s.num_bs(); ++l) {
    const HermitianMatrix& g = gset.at(l, er);
    total += quad_form(g, sol.info_beams[static_cast<std::size_t>(l)]) +
             trace_product(g, sol.dual_covariances[static_cast<std::size_t>(l)]);
  }
  return s.params.eh_efficiency * std::max(0.0, total);
}

double echo_power(const BeamformingSolution& sol, const ChannelTable& ch, int m) {
  if (m < 0 || ch.sense.empty() || m >= static_cast<int>(ch.sense.front().size()))
    throw DomainError("echo_power: sensing index out of range");
  const auto mi = static_cast<std::size_t>(m);
  double total = 0.0;
  for (std::size_t k = 0; k < sol.info_beams.size(); ++k) {
    // tr(h* h^T X) = h^T X h* with X = w w^H + R
    const ComplexVector hc = ch.sense[k][mi].conjugate();
    const Complex t = hc.dot(sol.info_beams[k]) * std::conj(hc.dot(sol.info_beams[k])) +
                      hc.dot(sol.dual_covariances[k] * hc);
    if (std::abs(t.imag()) > 1e-12 * std::max(std::abs(t.real()), 1e-300) + 1e-300)
      throw ContractViolation("echo_power: non-real trace; dual covariance is not Hermitian");
    total += ch.echo_weight[k][mi] * t.real();
  }
  return std::max(0.0, total);
}

double echo_power(const BeamformingSolution& sol, const Scenario& s, int m) {
  check_solution(sol, s);
  return echo_power(sol, ChannelTable::build(s), m);
}

double detection_probability(double phi, double noise_sense, double false_alarm) {
  if (!(phi >= 0.0)) throw DomainError("detection_probability: echo power must be nonnegative");
  if (!(noise_sense > 0.0)) throw DomainError("detection_probability: noise power must be positive");
  // Q(Q^-1(p)) round trip is off by an ulp; the identity is exact.
  if (phi == 0.0) return false_alarm;
  return q_function(q_inverse(false_alarm) - std::sqrt(2.0 * phi / noise_sense));
}

WorstCaseDetection worst_case_detection(const BeamformingSolution& sol, const Scenario& s,
                                        const ChannelTable& ch) {
  check_solution(sol, s);
  WorstCaseDetection out;
  const int m_count = static_cast<int>(s.sensing.points.size());
  for (int m = 0; m < m_count; ++m) {
    // P_D is strictly increasing in phi, so the minimizer is found on phi
    // (P_D itself saturates in floating point).
    const double phi = echo_power(sol, ch, m);
    if (m == 0 || phi < out.echo) {
      out.index = m;
      out.echo = phi;
    }
  }
  out.probability = detection_probability(out.echo, s.params.noise_sense, s.params.false_alarm);
  return out;
}

WorstCaseDetection worst_case_detection(const BeamformingSolution& sol, const Scenario& s) {
  return worst_case_detection(sol, s, ChannelTable::build(s));
}

double received_power(const BeamformingSolution& sol, const Scenario& s, int bs, const Point2D& p) {
  check_solution(sol, s);
  const auto k = static_cast<std::size_t>(bs);
  const ComplexVector h = channel_vector(s.bs.at(k), p);
  return beam_power(sol.info_beams[k], h) + quad_form(sol.dual_covariances[k], h);
}

MetricsSummary evaluate(const BeamformingSolution& sol, const Scenario& s, const CovarianceSet& gset) {
  const ChannelTable ch = ChannelTable::build(s);
  MetricsSummary out;
  for (int k = 0; k < s.num_bs(); ++k) {
    out.sinr.push_back(sinr(sol, s, ch, k, s.cus[static_cast<std::size_t>(k)].type));
    out.harvested.push_back(avg_harvested_power(sol, s, gset, k));
    out.transmit_power.push_back(sol.transmit_power(k));
  }
  for (int m = 0; m < static_cast<int>(s.sensing.points.size()); ++m)
    out.echo.push_back(echo_power(sol, ch, m));
  out.detection = worst_case_detection(sol, s, ch);
  return out;
}

}  // namespace iscap
