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

#include "iscap/sdr.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "iscap/error.hpp"
#include "iscap/metrics.hpp"

namespace iscap {

namespace {

HermitianMatrix outer(const ComplexVector& h) { return h * h.adjoint(); }

double quad_form(const HermitianMatrix& x, const ComplexVector& h) {
  return std::real(h.dot(x * h));
}

std::string indexed(const char* name, int i) { return std::string(name) + "[" + std::to_string(i) + "]"; }

// Sensing rows, SINR rows and power rows are common to both harvest models.
void add_sensing_rows(ConicProblem& p, const Scenario& s, const ChannelTable& ch) {
  const int k_count = s.num_bs();
  for (int m = 0; m < static_cast<int>(s.sensing.points.size()); ++m) {
    ConicRow row;
    row.kind = RowKind::Sensing;
    row.index = m;
    row.label = indexed("sense", m);
    for (int l = 0; l < k_count; ++l) {
      const auto li = static_cast<std::size_t>(l);
      const auto mi = static_cast<std::size_t>(m);
      // H = h* h^T, so tr(H X) = h^T X h*.
      const HermitianMatrix c = ch.echo_weight[li][mi] * outer(ch.sense[li][mi].conjugate());
      row.terms.emplace_back(ConicProblem::info_block(l), c);
      row.terms.emplace_back(ConicProblem::dual_block(l), c);
    }
    row.theta = -1.0;
    row.sense = RowSense::GreaterEqual;
    row.rhs = 0.0;
    p.rows.push_back(std::move(row));
  }
}

void add_sinr_rows(ConicProblem& p, const Scenario& s, const ChannelTable& ch) {
  const int k_count = s.num_bs();
  for (int k = 0; k < k_count; ++k) {
    const auto ki = static_cast<std::size_t>(k);
    const CuSpec& cu = s.cus[ki];
    ConicRow row;
    row.kind = RowKind::Sinr;
    row.index = k;
    row.label = indexed("sinr", k);
    // (1 + G)/G tr(h h^H W_k) - sum_l tr(h_l h_l^H W_l) - [dual terms] >= sigma^2;
    // the own-cell info terms are merged into one coefficient.
    for (int l = 0; l < k_count; ++l) {
      const auto li = static_cast<std::size_t>(l);
      const HermitianMatrix hh = outer(ch.cu[li][ki]);
      const double w_coef = (l == k) ? (1.0 + cu.sinr_threshold) / cu.sinr_threshold - 1.0 : -1.0;
      row.terms.emplace_back(ConicProblem::info_block(l), w_coef * hh);
      const bool dual_counted =
          cu.type == CuType::TypeI || (cu.type == CuType::TypeII && l != k);
      if (dual_counted) row.terms.emplace_back(ConicProblem::dual_block(l), -hh);
    }
    row.sense = RowSense::GreaterEqual;
    row.rhs = s.params.noise_comm;
    p.rows.push_back(std::move(row));
  }
}

void add_power_rows(ConicProblem& p, const Scenario& s) {
  const int n = s.elements();
  for (int k = 0; k < s.num_bs(); ++k) {
    ConicRow row;
    row.kind = RowKind::Power;
    row.index = k;
    row.label = indexed("power", k);
    const HermitianMatrix eye = HermitianMatrix::Identity(n, n);
    row.terms.emplace_back(ConicProblem::info_block(k), eye);
    row.terms.emplace_back(ConicProblem::dual_block(k), eye);
    row.sense = RowSense::LessEqual;
    row.rhs = s.params.power_budget;
    p.rows.push_back(std::move(row));
  }
}

void finish_scales(ConicProblem& p, const Scenario& s, const ChannelTable& ch) {
  p.power_scale = s.params.power_budget;
  double best = 0.0;
  for (std::size_t m = 0; m < s.sensing.points.size(); ++m) {
    double acc = 0.0;
    for (std::size_t l = 0; l < ch.sense.size(); ++l)
      acc += ch.echo_weight[l][m] * ch.sense[l][m].squaredNorm();
    best = std::max(best, acc);
  }
  p.theta_scale = best > 0.0 ? best * p.power_scale : 1.0;
}

ConicProblem skeleton(const Scenario& s) {
  s.validate();
  ConicProblem p;
  p.num_bs = s.num_bs();
  p.dim = s.elements();
  if (p.num_bs == 0) throw ValidationError("base_stations", "K must be positive");
  for (const auto& c : s.cus) p.cu_types.push_back(c.type);
  return p;
}

double row_value(const ConicRow& row, const std::vector<HermitianMatrix>& blocks, double theta,
                 double* magnitude) {
  double v = row.theta * theta;
  double mag = std::abs(v);
  for (const auto& [blk, c] : row.terms) {
    const double t = trace_product(c, blocks[static_cast<std::size_t>(blk)]);
    v += t;
    mag += std::abs(t);
  }
  if (magnitude) *magnitude = std::max({mag, std::abs(row.rhs)});
  return v;
}

}  // namespace

conic::Problem ConicProblem::to_standard() const {
  conic::Problem out;
  const int nb = num_blocks();
  out.psd_dims.assign(static_cast<std::size_t>(nb), 2 * dim);
  out.c_psd.assign(static_cast<std::size_t>(nb), Eigen::MatrixXd());
  const int m = constraint_count();
  out.lp_dim = 1 + m;
  out.c_lp = Eigen::VectorXd::Zero(out.lp_dim);
  out.c_lp(0) = -1.0;
  out.b.resize(m);
  out.rows.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const ConicRow& r = rows[static_cast<std::size_t>(i)];
    auto& dst = out.rows[static_cast<std::size_t>(i)];
    // <emb(C), Y> / 2 = Re tr(C X) with X = power_scale * extract(Y).
    // Slacks are measured in units of the row's own magnitude.
    double mag = std::abs(r.rhs) + std::abs(r.theta) * theta_scale;
    for (const auto& [blk, c] : r.terms) {
      bool merged = false;
      for (auto& e : dst.psd)
        if (e.first == blk) {
          e.second += 0.5 * power_scale * conic::embed(c);
          merged = true;
        }
      if (!merged) dst.psd.emplace_back(blk, 0.5 * power_scale * conic::embed(c));
      mag = std::max(mag, power_scale * c.norm());
    }
    if (!(mag > 0.0)) mag = 1.0;
    if (r.theta != 0.0) dst.lp.emplace_back(0, r.theta * theta_scale);
    dst.lp.emplace_back(1 + i, r.sense == RowSense::GreaterEqual ? -mag : mag);
    out.b(i) = r.rhs;
  }
  return out;
}

ConicProblem build_sdr(const Scenario& s, const CovarianceSet& gset) {
  ConicProblem p = skeleton(s);
  if (gset.size() != p.num_bs) throw MissingDataError("build_sdr: covariance set has wrong size");
  const ChannelTable ch = ChannelTable::build(s);
  add_sensing_rows(p, s, ch);
  add_sinr_rows(p, s, ch);
  for (int k = 0; k < p.num_bs; ++k) {
    ConicRow row;
    row.kind = RowKind::Harvest;
    row.index = k;
    row.label = indexed("harvest", k);
    for (int l = 0; l < p.num_bs; ++l) {
      const HermitianMatrix c = s.params.eh_efficiency * gset.at(l, k);
      row.terms.emplace_back(ConicProblem::info_block(l), c);
      row.terms.emplace_back(ConicProblem::dual_block(l), c);
    }
    row.sense = RowSense::GreaterEqual;
    row.rhs = s.ers[static_cast<std::size_t>(k)].harvest_threshold;
    p.rows.push_back(std::move(row));
  }
  add_power_rows(p, s);
  finish_scales(p, s, ch);
  return p;
}

ConicProblem build_sdr(const Scenario& s, const CovarianceSet& gset, CuType type) {
  return build_sdr(with_cu_type(s, type), gset);
}

ConicProblem build_sdr_pointwise(const Scenario& s,
                                 const std::vector<std::vector<Point2D>>& er_samples) {
  ConicProblem p = skeleton(s);
  if (static_cast<int>(er_samples.size()) != p.num_bs)
    throw ValidationError("ers", "one sample list per ER is required");
  const ChannelTable ch = ChannelTable::build(s);
  add_sensing_rows(p, s, ch);
  add_sinr_rows(p, s, ch);
  for (int k = 0; k < p.num_bs; ++k) {
    const auto& pts = er_samples[static_cast<std::size_t>(k)];
    for (std::size_t j = 0; j < pts.size(); ++j) {
      ConicRow row;
      row.kind = RowKind::Harvest;
      row.index = k;
      row.label = indexed("harvest", k) + indexed("@", static_cast<int>(j));
      for (int l = 0; l < p.num_bs; ++l) {
        const HermitianMatrix c =
            s.params.eh_efficiency * outer(channel_vector(s.bs[static_cast<std::size_t>(l)], pts[j]));
        row.terms.emplace_back(ConicProblem::info_block(l), c);
        row.terms.emplace_back(ConicProblem::dual_block(l), c);
      }
      row.sense = RowSense::GreaterEqual;
      row.rhs = s.ers[static_cast<std::size_t>(k)].harvest_threshold;
      p.rows.push_back(std::move(row));
    }
  }
  add_power_rows(p, s);
  finish_scales(p, s, ch);
  return p;
}

SdpSolution solve_sdp(const ConicProblem& p, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  const conic::Problem std_form = p.to_standard();
  conic::Options opt;
  opt.tol = tol;
  const conic::Result res = conic::solve(std_form, opt);

  SdpSolution out;
  out.report.status = res.status;
  out.report.primal_residual = res.primal_residual;
  out.report.dual_residual = res.dual_residual;
  out.report.duality_gap = res.gap;
  out.report.iterations = res.iterations;
  out.report.message = res.message;

  std::vector<HermitianMatrix> blocks;
  for (int j = 0; j < p.num_blocks(); ++j)
    blocks.push_back(p.power_scale * conic::extract(res.x_psd[static_cast<std::size_t>(j)]));
  out.theta = p.theta_scale * res.x_lp(0);
  out.report.objective = out.theta;
  for (int k = 0; k < p.num_bs; ++k) {
    out.w.push_back(blocks[static_cast<std::size_t>(ConicProblem::info_block(k))]);
    out.r.push_back(blocks[static_cast<std::size_t>(ConicProblem::dual_block(k))]);
    out.report.info_ranks.push_back(numerical_rank(out.w.back(), 1e-6));
  }
  for (const auto& row : p.rows) {
    double mag = 0.0;
    const double v = row_value(row, blocks, out.theta, &mag);
    ConstraintActivity a;
    a.label = row.label;
    a.slack = row.sense == RowSense::GreaterEqual ? v - row.rhs : row.rhs - v;
    a.scale = mag > 0.0 ? mag : 1.0;
    a.active = std::abs(a.slack) <= 1e-6 * a.scale;
    out.report.activities.push_back(std::move(a));
  }
  out.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

RankOneParts extract_rank_one(const HermitianMatrix& w, const HermitianMatrix& r,
                              const ComplexVector& h) {
  require_hermitian(w, "extract_rank_one(W)", 1e-9);
  require_hermitian(r, "extract_rank_one(R)", 1e-9);
  const ComplexVector wh = w * h;
  const double desired = std::real(h.dot(wh));
  const double scale = std::max(w.cwiseAbs().maxCoeff() * static_cast<double>(w.rows()), 1e-300) *
                       h.squaredNorm();
  if (!(desired > 1e-12 * scale))
    throw DegenerateSolution("extract_rank_one: h^H W h is not positive; the CU receives no power");
  RankOneParts out;
  out.beam = wh / std::sqrt(desired);
  out.dual = symmetrized(w + r - out.beam * out.beam.adjoint());
  return out;
}

RankOneParts extract_rank_one(const HermitianMatrix& w, const HermitianMatrix& r, const Scenario& s,
                              int k) {
  const auto ki = static_cast<std::size_t>(k);
  return extract_rank_one(w, r, channel_vector(s.bs.at(ki), s.cus.at(ki).position));
}

void remove_intra_cell_leakage(HermitianMatrix& w, HermitianMatrix& r, const ComplexVector& h) {
  const ComplexVector rh = r * h;
  const double leak = std::real(h.dot(rh));
  if (!(leak > 0.0)) return;
  const ComplexVector u = rh / std::sqrt(leak);
  const HermitianMatrix uu = u * u.adjoint();
  w = symmetrized(w + uu);
  r = symmetrized(r - uu);
}

FeasibilityCheck check_unrelaxed(const BeamformingSolution& sol, const Scenario& s,
                                 const CovarianceSet& gset, double theta) {
  const ChannelTable ch = ChannelTable::build(s);
  FeasibilityCheck out;
  auto push = [&](std::string label, double value, double target, bool upper) {
    ConstraintActivity a;
    a.label = std::move(label);
    a.scale = std::max(std::abs(target), 1e-300);
    a.slack = upper ? target - value : value - target;
    a.active = std::abs(a.slack) <= 1e-6 * a.scale;
    out.max_violation = std::max(out.max_violation, -a.slack / a.scale);
    out.rows.push_back(std::move(a));
  };
  out.min_echo = std::numeric_limits<double>::infinity();
  for (int m = 0; m < static_cast<int>(s.sensing.points.size()); ++m) {
    const double phi = echo_power(sol, ch, m);
    out.min_echo = std::min(out.min_echo, phi);
    push(indexed("sense", m), phi, theta, false);
  }
  for (int k = 0; k < s.num_bs(); ++k) {
    const auto& cu = s.cus[static_cast<std::size_t>(k)];
    push(indexed("sinr", k), sinr(sol, s, ch, k, cu.type), cu.sinr_threshold, false);
  }
  for (int k = 0; k < s.num_bs(); ++k)
    push(indexed("harvest", k), avg_harvested_power(sol, s, gset, k),
         s.ers[static_cast<std::size_t>(k)].harvest_threshold, false);
  for (int k = 0; k < s.num_bs(); ++k) {
    push(indexed("power", k), sol.transmit_power(k), s.params.power_budget, true);
    out.max_psd_residual =
        std::max(out.max_psd_residual,
                 psd_residual(sol.dual_covariances[static_cast<std::size_t>(k)]) / s.params.power_budget);
  }
  return out;
}

namespace {

SdrOutcome reconstruct(const Scenario& s, const CovarianceSet& gset, SdpSolution relaxed,
                       Provenance provenance) {
  SdrOutcome out;
  const int k_count = s.num_bs();
  const int n = s.elements();
  out.solution = BeamformingSolution::zero(k_count, n);
  out.solution.provenance = provenance;
  if (!relaxed.report.optimal()) {
    out.solution.report = relaxed.report;
    out.relaxed = std::move(relaxed);
    return out;
  }
  const ChannelTable ch = ChannelTable::build(s);
  for (int k = 0; k < k_count; ++k) {
    const auto ki = static_cast<std::size_t>(k);
    const ComplexVector& h = ch.cu[ki][ki];
    HermitianMatrix w = relaxed.w[ki];
    HermitianMatrix r = relaxed.r[ki];
    out.raw_leakage.push_back(quad_form(r, h));
    if (s.cus[ki].type != CuType::TypeIII) remove_intra_cell_leakage(w, r, h);
    const RankOneParts parts = extract_rank_one(w, r, h);
    out.solution.info_beams[ki] = parts.beam;
    out.solution.dual_covariances[ki] = parts.dual;
  }
  out.check = check_unrelaxed(out.solution, s, gset, relaxed.theta);
  out.reconstructed_objective = out.check.min_echo;
  SolveReport rep = relaxed.report;
  rep.activities = out.check.rows;
  out.solution.report = std::move(rep);
  out.relaxed = std::move(relaxed);
  return out;
}

Scenario single_cell(const Scenario& s, int k) {
  const auto ki = static_cast<std::size_t>(k);
  Scenario one = s;
  one.bs = {s.bs[ki]};
  one.cus = {s.cus[ki]};
  one.ers = {s.ers[ki]};
  one.label = s.label + " / BS " + std::to_string(k) + " alone";
  return one;
}

}  // namespace

SdrOutcome solve_coordinated(const Scenario& s, const CovarianceSet& gset, double tol) {
  return reconstruct(s, gset, solve_sdp(build_sdr(s, gset), tol), Provenance::SDR);
}

BeamformingSolution solve_noncoordinated(const Scenario& s, const CovarianceSet& gset, double tol) {
  const int k_count = s.num_bs();
  BeamformingSolution out = BeamformingSolution::zero(k_count, s.elements());
  out.provenance = Provenance::NonCoordinated;
  SolveReport rep;
  rep.status = SolveStatus::Optimal;
  std::ostringstream msg;
  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < k_count; ++k) {
    const auto ki = static_cast<std::size_t>(k);
    const Scenario one = single_cell(s, k);
    CovarianceSet g1(1);
    g1.set(0, 0, gset.entry(k, k));
    const SdrOutcome part = solve_coordinated(one, g1, tol);
    const SolveReport& pr = *part.solution.report;
    rep.iterations += pr.iterations;
    rep.info_ranks.push_back(pr.info_ranks.empty() ? 0 : pr.info_ranks.front());
    if (!pr.optimal()) {
      if (rep.status == SolveStatus::Optimal || pr.status == SolveStatus::Infeasible)
        rep.status = pr.status;
      msg << "BS " << k << ": " << to_string(pr.status) << " (" << pr.message << "); ";
      continue;
    }
    out.info_beams[ki] = part.solution.info_beams.front();
    out.dual_covariances[ki] = part.solution.dual_covariances.front();
  }
  if (rep.optimal()) {
    const FeasibilityCheck chk = check_unrelaxed(out, s, gset, 0.0);
    rep.activities = chk.rows;
    rep.objective = chk.min_echo;
    msg << "per-BS designs combined";
  }
  rep.message = msg.str();
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.report = std::move(rep);
  return out;
}

std::vector<Point2D> worst_case_samples(const UncertaintyRegion& region, int sample_count) {
  if (sample_count != 9) throw ValidationError("sample_count", "only the 9-point layout is built in");
  if (region.kind == UncertaintyRegion::Kind::Gaussian)
    throw ValidationError("ers.region", "worst-case samples need a disc or point region");
  const Point2D c = region.center;
  if (region.is_point()) return {c};
  const double r = region.radius;
  const double q = r / std::numbers::sqrt2;
  return {c,
          {c.x + r, c.y}, {c.x - r, c.y}, {c.x, c.y + r}, {c.x, c.y - r},
          {c.x + q, c.y + q}, {c.x - q, c.y + q}, {c.x - q, c.y - q}, {c.x + q, c.y - q}};
}

SdrOutcome solve_worstcase_robust(const Scenario& s, const CovarianceSet& gset, int sample_count,
                                  double tol) {
  std::vector<std::vector<Point2D>> samples;
  for (const auto& er : s.ers) samples.push_back(worst_case_samples(er.region, sample_count));
  SdpSolution relaxed = solve_sdp(build_sdr_pointwise(s, samples), tol);
  return reconstruct(s, gset, std::move(relaxed), Provenance::WorstCaseRobust);
}

CorollaryReport verify_corollary(const Scenario& s, const CovarianceSet& gset, double tol) {
  CorollaryReport out;
  const SdrOutcome r1 = solve_coordinated(with_cu_type(s, CuType::TypeI), gset, tol);
  const SdrOutcome r2 = solve_coordinated(with_cu_type(s, CuType::TypeII), gset, tol);
  const SdrOutcome r3 = solve_coordinated(with_cu_type(s, CuType::TypeIII), gset, tol);
  out.all_optimal = r1.relaxed.report.optimal() && r2.relaxed.report.optimal() &&
                    r3.relaxed.report.optimal();
  out.theta_type1 = r1.relaxed.theta;
  out.theta_type2 = r2.relaxed.theta;
  out.theta_type3 = r3.relaxed.theta;
  out.relative_gap = std::abs(out.theta_type1 - out.theta_type2) / std::max(out.theta_type1, 1e-12);
  if (!r1.relaxed.report.optimal()) return out;
  const ChannelTable ch = ChannelTable::build(s);
  for (int k = 0; k < s.num_bs(); ++k) {
    const auto ki = static_cast<std::size_t>(k);
    const ComplexVector& h = ch.cu[ki][ki];
    const HermitianMatrix& r = r1.solution.dual_covariances[ki];
    const double leak = quad_form(r, h);
    const double denom = std::max(r.trace().real() * h.squaredNorm(), 1e-300);
    out.leakage.push_back(leak);
    out.leakage_relative.push_back(leak / denom);
    const HermitianMatrix& rr = r1.relaxed.r[ki];
    out.raw_leakage_relative.push_back(
        r1.raw_leakage[ki] / std::max(rr.trace().real() * h.squaredNorm(), 1e-300));
  }
  return out;
}

}  // namespace iscap
