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

#include "iscap/mrt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>

#include "iscap/conic.hpp"
#include "iscap/error.hpp"
#include "iscap/metrics.hpp"

namespace iscap {

namespace {

double gain(const ComplexVector& h, const ComplexVector& x) { return std::norm(h.dot(x)); }

double quad_form(const HermitianMatrix& g, const ComplexVector& x) {
  return std::real(x.dot(g * x));
}

// Variable layout: 3k + {0,1,2} = rho_c, rho_e, rho_s of BS k; 3K = Theta.
struct LpRow {
  std::string label;
  std::vector<std::pair<int, double>> coef;
  bool greater = true;
  double rhs = 0.0;
};

}  // namespace

BeamDirections beam_directions(const Scenario& s, const CovarianceSet& gset) {
  const ChannelTable ch = ChannelTable::build(s);
  BeamDirections d;
  const int k_count = s.num_bs();
  const auto m_count = s.sensing.points.size();
  for (int k = 0; k < k_count; ++k) {
    const auto ki = static_cast<std::size_t>(k);
    const ComplexVector& h = ch.cu[ki][ki];
    const double nrm = h.norm();
    if (!(nrm > 0.0)) throw DegenerateSolution("beam_directions: zero CU channel");
    d.info.push_back(h / nrm);
    d.energy.push_back(principal_eigenpair(gset.at(k, k)).vector);
    HermitianMatrix a = HermitianMatrix::Zero(s.elements(), s.elements());
    for (std::size_t m = 0; m < m_count; ++m) {
      const ComplexVector hc = ch.sense[ki][m].conjugate();
      a += ch.echo_weight[ki][m] * (hc * hc.adjoint());
    }
    a /= static_cast<double>(m_count);
    a = symmetrized(a);
    d.sensing.push_back(principal_eigenpair(a).vector);
    d.round_trip.push_back(std::move(a));
  }
  return d;
}

std::pair<PowerAllocation, SolveReport> build_and_solve_lp(const Scenario& s,
                                                           const CovarianceSet& gset,
                                                           const BeamDirections& dirs,
                                                           double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  const ChannelTable ch = ChannelTable::build(s);
  const int k_count = s.num_bs();
  const int theta_var = 3 * k_count;
  const double p_max = s.params.power_budget;
  std::vector<LpRow> rows;

  auto dir = [&](int l, int which) -> const ComplexVector& {
    const auto li = static_cast<std::size_t>(l);
    return which == 0 ? dirs.info[li] : which == 1 ? dirs.energy[li] : dirs.sensing[li];
  };

  // Sensing: sum over every BS l of its three beams' echo at s_m.
  double theta_scale = 0.0;
  for (std::size_t m = 0; m < s.sensing.points.size(); ++m) {
    LpRow r;
    r.label = "sense[" + std::to_string(m) + "]";
    double best = 0.0;
    for (int l = 0; l < k_count; ++l) {
      const auto li = static_cast<std::size_t>(l);
      const ComplexVector hc = ch.sense[li][m].conjugate();
      for (int b = 0; b < 3; ++b) {
        const double c = ch.echo_weight[li][m] * gain(hc, dir(l, b));
        r.coef.emplace_back(3 * l + b, c);
        best += c;
      }
    }
    theta_scale = std::max(theta_scale, best * p_max);
    r.coef.emplace_back(theta_var, -1.0);
    rows.push_back(std::move(r));
  }
  // SINR per CU type.
  for (int k = 0; k < k_count; ++k) {
    const auto ki = static_cast<std::size_t>(k);
    const CuSpec& cu = s.cus[ki];
    LpRow r;
    r.label = "sinr[" + std::to_string(k) + "]";
    for (int l = 0; l < k_count; ++l) {
      const ComplexVector& h = ch.cu[static_cast<std::size_t>(l)][ki];
      const double gc = gain(h, dir(l, 0));
      r.coef.emplace_back(3 * l, l == k ? gc / cu.sinr_threshold : -gc);
      const bool dual_counted = cu.type == CuType::TypeI || (cu.type == CuType::TypeII && l != k);
      if (dual_counted) {
        r.coef.emplace_back(3 * l + 1, -gain(h, dir(l, 1)));
        r.coef.emplace_back(3 * l + 2, -gain(h, dir(l, 2)));
      }
    }
    r.rhs = s.params.noise_comm;
    rows.push_back(std::move(r));
  }
  // Harvest: >= Omega / eta.
  for (int k = 0; k < k_count; ++k) {
    LpRow r;
    r.label = "harvest[" + std::to_string(k) + "]";
    for (int l = 0; l < k_count; ++l) {
      const HermitianMatrix& g = gset.at(l, k);
      for (int b = 0; b < 3; ++b) r.coef.emplace_back(3 * l + b, quad_form(g, dir(l, b)));
    }
    r.rhs = s.ers[static_cast<std::size_t>(k)].harvest_threshold / s.params.eh_efficiency;
    rows.push_back(std::move(r));
  }
  // Per-BS budget.
  for (int k = 0; k < k_count; ++k) {
    LpRow r;
    r.label = "power[" + std::to_string(k) + "]";
    for (int b = 0; b < 3; ++b) r.coef.emplace_back(3 * k + b, 1.0);
    r.greater = false;
    r.rhs = p_max;
    rows.push_back(std::move(r));
  }
  if (!(theta_scale > 0.0)) theta_scale = 1.0;

  // Standard form: powers in units of P_max, Theta in units of theta_scale,
  // each slack in units of its row's magnitude.
  conic::Problem lp;
  const int n_rows = static_cast<int>(rows.size());
  lp.lp_dim = theta_var + 1 + n_rows;
  lp.c_lp = Eigen::VectorXd::Zero(lp.lp_dim);
  lp.c_lp(theta_var) = -1.0;
  lp.b.resize(n_rows);
  for (int i = 0; i < n_rows; ++i) {
    const LpRow& r = rows[static_cast<std::size_t>(i)];
    conic::Problem::Row dst;
    double mag = std::abs(r.rhs);
    for (const auto& [v, c] : r.coef) {
      const double scaled = c * (v == theta_var ? theta_scale : p_max);
      if (scaled != 0.0) dst.lp.emplace_back(v, scaled);
      mag = std::max(mag, std::abs(scaled));
    }
    if (!(mag > 0.0)) mag = 1.0;
    dst.lp.emplace_back(theta_var + 1 + i, r.greater ? -mag : mag);
    lp.rows.push_back(std::move(dst));
    lp.b(i) = r.rhs;
  }
  conic::Options opt;
  opt.tol = tol;
  const conic::Result res = conic::solve(lp, opt);

  PowerAllocation a;
  SolveReport rep;
  rep.status = res.status;
  rep.iterations = res.iterations;
  rep.primal_residual = res.primal_residual;
  rep.dual_residual = res.dual_residual;
  rep.duality_gap = res.gap;
  rep.message = res.message;
  for (int k = 0; k < k_count; ++k) {
    a.rho_c.push_back(std::max(0.0, p_max * res.x_lp(3 * k)));
    a.rho_e.push_back(std::max(0.0, p_max * res.x_lp(3 * k + 1)));
    a.rho_s.push_back(std::max(0.0, p_max * res.x_lp(3 * k + 2)));
  }
  a.theta = theta_scale * res.x_lp(theta_var);
  rep.objective = a.theta;
  for (const auto& r : rows) {
    double lhs = 0.0, mag = std::abs(r.rhs);
    for (const auto& [v, c] : r.coef) {
      const double x = v == theta_var ? a.theta
                       : v % 3 == 0   ? a.rho_c[static_cast<std::size_t>(v / 3)]
                       : v % 3 == 1   ? a.rho_e[static_cast<std::size_t>(v / 3)]
                                      : a.rho_s[static_cast<std::size_t>(v / 3)];
      lhs += c * x;
      mag = std::max(mag, std::abs(c * x));
    }
    ConstraintActivity act;
    act.label = r.label;
    act.slack = r.greater ? lhs - r.rhs : r.rhs - lhs;
    act.scale = mag > 0.0 ? mag : 1.0;
    act.active = std::abs(act.slack) <= 1e-6 * act.scale;
    rep.activities.push_back(std::move(act));
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {a, rep};
}

PowerAllocation closed_form_asymptotic(const Scenario& s, const CovarianceSet& gset,
                                       const BeamDirections& dirs) {
  PowerAllocation a;
  const double p_max = s.params.power_budget;
  for (int k = 0; k < s.num_bs(); ++k) {
    const auto ki = static_cast<std::size_t>(k);
    const ComplexVector h = channel_vector(s.bs[ki], s.cus[ki].position);
    const double rc = s.cus[ki].sinr_threshold * s.params.noise_comm / h.squaredNorm();
    const double ge = quad_form(gset.at(k, k), dirs.energy[ki]);
    const double re = (s.ers[ki].harvest_threshold / s.params.eh_efficiency) / ge;
    a.rho_c.push_back(rc);
    a.rho_e.push_back(re);
    a.rho_s.push_back(p_max - rc - re);
  }
  return a;
}

bool asymptotic_feasible(const PowerAllocation& a, double p_max) {
  for (std::size_t k = 0; k < a.rho_c.size(); ++k) {
    if (a.rho_c[k] > p_max || a.rho_e[k] > p_max || a.rho_c[k] + a.rho_e[k] > p_max) return false;
  }
  return true;
}

BeamformingSolution to_solution(const PowerAllocation& a, const BeamDirections& dirs,
                                Provenance provenance) {
  BeamformingSolution out;
  out.provenance = provenance;
  for (std::size_t k = 0; k < a.rho_c.size(); ++k) {
    if (a.rho_c[k] < 0.0 || a.rho_e[k] < 0.0 || a.rho_s[k] < 0.0)
      throw ContractViolation("to_solution: negative power allocation");
    out.info_beams.push_back(std::sqrt(a.rho_c[k]) * dirs.info[k]);
    out.dual_covariances.push_back(a.rho_e[k] * dirs.energy[k] * dirs.energy[k].adjoint() +
                                   a.rho_s[k] * dirs.sensing[k] * dirs.sensing[k].adjoint());
  }
  return out;
}

MrtOutcome solve_mrt(const Scenario& s, const CovarianceSet& gset, double tol) {
  MrtOutcome out;
  out.directions = beam_directions(s, gset);
  auto [alloc, rep] = build_and_solve_lp(s, gset, out.directions, tol);
  out.allocation = alloc;
  if (rep.optimal()) {
    out.solution = to_solution(alloc, out.directions, Provenance::MRT);
  } else {
    out.solution = BeamformingSolution::zero(s.num_bs(), s.elements());
    out.solution.provenance = Provenance::MRT;
  }
  out.solution.report = std::move(rep);
  return out;
}

MrtOutcome solve_mrt_asymptotic(const Scenario& s, const CovarianceSet& gset) {
  MrtOutcome out;
  out.directions = beam_directions(s, gset);
  out.allocation = closed_form_asymptotic(s, gset, out.directions);
  SolveReport rep;
  rep.asymptotic_approximation = true;
  if (asymptotic_feasible(out.allocation, s.params.power_budget)) {
    out.solution = to_solution(out.allocation, out.directions, Provenance::MRTAsymptotic);
    const ChannelTable ch = ChannelTable::build(s);
    double theta = std::numeric_limits<double>::infinity();
    for (int m = 0; m < static_cast<int>(s.sensing.points.size()); ++m)
      theta = std::min(theta, echo_power(out.solution, ch, m));
    out.allocation.theta = theta;
    rep.status = SolveStatus::Optimal;
    rep.objective = theta;
    rep.message = "asymptotic approximation (closed form, large-array limit)";
  } else {
    out.solution = BeamformingSolution::zero(s.num_bs(), s.elements());
    out.solution.provenance = Provenance::MRTAsymptotic;
    rep.status = SolveStatus::Infeasible;
    rep.message = "closed-form allocation exceeds the power budget";
  }
  out.solution.report = std::move(rep);
  return out;
}

}  // namespace iscap
