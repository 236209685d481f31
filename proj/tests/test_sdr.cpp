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

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "helpers.hpp"
#include "iscap/error.hpp"
#include "iscap/metrics.hpp"
#include "iscap/sdr.hpp"

using namespace iscap;
using iscap::testing::subset;
using iscap::testing::tiny_instance;

namespace {

// Case 3 at N elements with thresholds the small arrays can meet: at N = 8
// a 10 dB SINR target is infeasible alongside Omega = -40 dBm.
Scenario desk(int n, double harvest_dbm = -40.0, double sinr_db = -1.0) {
  if (sinr_db < 0.0) sinr_db = n >= 16 ? 10.0 : 0.0;
  return with_sinr_db(with_harvest_dbm(with_elements(builtin_case(3), n), harvest_dbm), sinr_db);
}

bool has_block(const ConicRow& row, int blk) {
  for (const auto& [b, c] : row.terms)
    if (b == blk) return true;
  return false;
}

}  // namespace

TEST_CASE("problem size") {
  const Scenario s = desk(4);
  const CovarianceSet g = compute_covariance_set(s);
  const ConicProblem p = build_sdr(s, g);
  CHECK(p.num_blocks() == 6);
  CHECK(p.variable_count() == 7);
  CHECK(p.constraint_count() == 5 + 3 * 3);
  const conic::Problem q = p.to_standard();
  CHECK(q.psd_dims.size() == 6);
  CHECK(q.psd_dims[0] == 8);
  CHECK(q.lp_dim == 1 + p.constraint_count());
  CovarianceSet empty(3);
  CHECK_THROWS_AS(build_sdr(s, empty), MissingDataError);
}

TEST_CASE("SINR row structure by CU type") {
  const Scenario s = desk(4);
  const CovarianceSet g = compute_covariance_set(s);
  for (CuType t : {CuType::TypeI, CuType::TypeII, CuType::TypeIII}) {
    const ConicProblem p = build_sdr(s, g, t);
    for (const auto& row : p.rows) {
      if (row.kind != RowKind::Sinr) continue;
      for (int l = 0; l < 3; ++l) {
        CHECK(has_block(row, ConicProblem::info_block(l)));
        const bool dual = has_block(row, ConicProblem::dual_block(l));
        if (t == CuType::TypeI) CHECK(dual);
        if (t == CuType::TypeII) CHECK(dual == (l != row.index));
        if (t == CuType::TypeIII) CHECK_FALSE(dual);
      }
    }
  }
}

TEST_CASE("SINR row evaluates the rearranged constraint") {
  // With W_k = w w^H the row value is (1 + G)/G |h^H w|^2 - (interference) - noise,
  // which is >= 0 exactly when SINR >= G.
  const Scenario s = with_cu_type(desk(4), CuType::TypeI);
  const CovarianceSet g = compute_covariance_set(s);
  const ConicProblem p = build_sdr(s, g);
  std::mt19937_64 rng(3);
  BeamformingSolution sol = BeamformingSolution::zero(3, 4);
  std::vector<HermitianMatrix> blocks;
  for (int k = 0; k < 3; ++k) {
    sol.info_beams[static_cast<std::size_t>(k)] = 0.1 * iscap::testing::random_vector(4, rng);
    const ComplexVector a = iscap::testing::random_vector(4, rng);
    sol.dual_covariances[static_cast<std::size_t>(k)] = 0.01 * a * a.adjoint();
    blocks.push_back(sol.info_beams[static_cast<std::size_t>(k)] * sol.info_beams[static_cast<std::size_t>(k)].adjoint());
    blocks.push_back(sol.dual_covariances[static_cast<std::size_t>(k)]);
  }
  for (const auto& row : p.rows) {
    if (row.kind != RowKind::Sinr) continue;
    double v = 0.0;
    for (const auto& [b, c] : row.terms) v += (c * blocks[static_cast<std::size_t>(b)]).trace().real();
    const double gam = s.cus[static_cast<std::size_t>(row.index)].sinr_threshold;
    const double sinr_val = sinr(sol, s, row.index, CuType::TypeI);
    // Interference-plus-noise from the SINR definition.
    const ComplexVector h = channel_vector(s.bs[static_cast<std::size_t>(row.index)], s.cus[static_cast<std::size_t>(row.index)].position);
    const double desired = std::norm(h.dot(sol.info_beams[static_cast<std::size_t>(row.index)]));
    const double ipn = desired / sinr_val;
    CHECK(v - row.rhs == doctest::Approx(desired / gam - ipn).epsilon(1e-9));
  }
}

TEST_CASE("trivially feasible toy is optimal with positive objective") {
  const Scenario s = tiny_instance(1e-6, 1e-6, CuType::TypeI);
  const CovarianceSet g = compute_covariance_set(s);
  const SdpSolution r = solve_sdp(build_sdr(s, g));
  REQUIRE(r.report.status == SolveStatus::Optimal);
  CHECK(r.theta > 0.0);
  CHECK(r.report.primal_residual <= 1e-7);
  CHECK(r.report.dual_residual <= 1e-7);
  CHECK(r.report.activities.size() == 4);
  for (const auto& w : r.w) CHECK(psd_residual(w) <= 1e-7 * s.params.power_budget);
  for (const auto& x : r.r) CHECK(psd_residual(x) <= 1e-7 * s.params.power_budget);
}

TEST_CASE("harvest target beyond the eigenvalue bound is infeasible") {
  Scenario s = desk(4);
  const CovarianceSet g = compute_covariance_set(s);
  // eta * sum_l tr(G_l W_l) <= eta * P * sum_l lambda_max(G_l) over the three BSs.
  double bound = 0.0;
  for (int l = 0; l < 3; ++l) bound += principal_eigenpair(g.at(l, 0)).value;
  bound *= s.params.eh_efficiency * s.params.power_budget;
  s.ers[0].harvest_threshold = 1.5 * bound;
  const SdpSolution r = solve_sdp(build_sdr(s, g));
  CHECK(r.report.status == SolveStatus::Infeasible);
  const SdrOutcome o = solve_coordinated(s, g);
  REQUIRE(o.solution.report.has_value());
  CHECK(o.solution.report->status == SolveStatus::Infeasible);
  CHECK(o.solution.info_beams[0].norm() == 0.0);
}

TEST_CASE("brute-force oracle, K=1 N=2 M=1") {
  for (CuType t : {CuType::TypeI, CuType::TypeIII}) {
    const Scenario s = tiny_instance(0.3, 0.3, t);
    const CovarianceSet g = compute_covariance_set(s);
    const SdpSolution r = solve_sdp(build_sdr(s, g));
    REQUIRE(r.report.status == SolveStatus::Optimal);
    const double grid = iscap::testing::brute_force_k1n2(s);
    REQUIRE(grid > 0.0);
    CHECK(grid <= r.theta * (1.0 + 1e-6));
    CHECK((r.theta - grid) / r.theta <= 0.01);
  }
}

TEST_CASE("rank-one extraction examples") {
  std::mt19937_64 rng(5);
  SUBCASE("rank-one W is returned unchanged") {
    const ComplexVector w = iscap::testing::random_vector(3, rng);
    const ComplexVector h = iscap::testing::random_vector(3, rng);
    const ComplexVector a = iscap::testing::random_vector(3, rng);
    const HermitianMatrix r = a * a.adjoint();
    const RankOneParts parts = extract_rank_one(w * w.adjoint(), r, h);
    const Complex phase = parts.beam.dot(w) / w.squaredNorm();
    CHECK(std::abs(std::abs(phase) - 1.0) <= 1e-12);
    CHECK((parts.beam * phase - w).norm() <= 1e-12 * w.norm());
    CHECK((parts.dual - r).cwiseAbs().maxCoeff() <= 1e-12 * r.cwiseAbs().maxCoeff());
  }
  SUBCASE("W = I, h = e1") {
    ComplexVector h = ComplexVector::Zero(2);
    h(0) = 1.0;
    const HermitianMatrix r = 0.3 * HermitianMatrix::Identity(2, 2);
    const RankOneParts parts = extract_rank_one(HermitianMatrix::Identity(2, 2), r, h);
    CHECK(std::abs(parts.beam(0) - Complex(1.0, 0.0)) <= 1e-15);
    CHECK(std::abs(parts.beam(1)) <= 1e-15);
    HermitianMatrix expect = r;
    expect(1, 1) += 1.0;
    CHECK((parts.dual - expect).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("general W: desired power and total covariance preserved, PSD remainder") {
    const HermitianMatrix b = iscap::testing::random_hermitian(4, rng);
    const HermitianMatrix w = b * b;  // PSD
    const ComplexVector h = iscap::testing::random_vector(4, rng);
    const HermitianMatrix r = HermitianMatrix::Zero(4, 4);
    const RankOneParts parts = extract_rank_one(w, r, h);
    const double before = std::real(h.dot(w * h));
    CHECK(std::norm(h.dot(parts.beam)) == doctest::Approx(before).epsilon(1e-10));
    CHECK((parts.beam * parts.beam.adjoint() + parts.dual - w - r).cwiseAbs().maxCoeff() <= 1e-12 * w.norm());
    CHECK(psd_residual(parts.dual) <= 1e-9 * w.norm());
  }
  SUBCASE("zero desired power is degenerate") {
    ComplexVector h = ComplexVector::Zero(2);
    h(0) = 1.0;
    HermitianMatrix w = HermitianMatrix::Zero(2, 2);
    w(1, 1) = 1.0;
    CHECK_THROWS_AS(extract_rank_one(w, HermitianMatrix::Zero(2, 2), h), DegenerateSolution);
  }
}

TEST_CASE("tightness on case 3 at N=16") {
  for (CuType t : {CuType::TypeI, CuType::TypeII, CuType::TypeIII}) {
    const Scenario s = with_cu_type(desk(16), t);
    const CovarianceSet g = compute_covariance_set(s);
    const SdrOutcome o = solve_coordinated(s, g);
    REQUIRE(o.relaxed.report.status == SolveStatus::Optimal);
    CHECK(o.check.max_violation <= 1e-6);
    CHECK(o.check.max_psd_residual <= 1e-7);
    CHECK(std::abs(o.reconstructed_objective - o.relaxed.theta) <= 1e-6 * o.relaxed.theta);
    for (int k = 0; k < 3; ++k) {
      const auto ki = static_cast<std::size_t>(k);
      const double tr_before = (o.relaxed.w[ki] + o.relaxed.r[ki]).trace().real();
      CHECK(o.solution.transmit_power(k) == doctest::Approx(tr_before).epsilon(1e-12));
    }
  }
}

TEST_CASE("corollary and type ordering on case 3 at N=8") {
  const Scenario s = desk(8);
  const CovarianceSet g = compute_covariance_set(s);
  const CorollaryReport c = verify_corollary(s, g);
  REQUIRE(c.all_optimal);
  CHECK(c.relative_gap <= 1e-5);
  CHECK(c.theta_type3 >= c.theta_type2 * (1.0 - 1e-9));
  CHECK(c.theta_type2 >= c.theta_type1 * (1.0 - 1e-7));
  for (double v : c.leakage_relative) CHECK(v <= 1e-6);
}

TEST_CASE("homogeneity") {
  const Scenario s = desk(8);
  const CovarianceSet g = compute_covariance_set(s);
  const double base = solve_sdp(build_sdr(s, g)).theta;
  for (double beta : {0.1, 10.0}) {
    Scenario t = s;
    t.params.noise_comm *= beta;
    t.params.noise_sense *= beta;
    t.params.power_budget *= beta;
    for (auto& e : t.ers) e.harvest_threshold *= beta;
    const SdpSolution r = solve_sdp(build_sdr(t, g));
    REQUIRE(r.report.optimal());
    CHECK(std::abs(r.theta - beta * base) <= 1e-6 * beta * base);
  }
}

TEST_CASE("monotone in the SINR and harvest thresholds") {
  const Scenario s = with_cu_type(desk(8), CuType::TypeIII);
  const CovarianceSet g = compute_covariance_set(s);
  double prev = std::numeric_limits<double>::infinity();
  for (double gdb : {-5.0, 0.0, 5.0}) {
    const SdpSolution r = solve_sdp(build_sdr(with_sinr_db(s, gdb), g));
    REQUIRE(r.report.optimal());
    CHECK(r.theta <= prev * (1.0 + 1e-7));
    prev = r.theta;
  }
  prev = std::numeric_limits<double>::infinity();
  for (double om : {-50.0, -45.0, -40.0}) {
    const SdpSolution r = solve_sdp(build_sdr(with_harvest_dbm(s, om), g));
    REQUIRE(r.report.optimal());
    CHECK(r.theta <= prev * (1.0 + 1e-7));
    prev = r.theta;
  }
}

TEST_CASE("worst-case sample layout") {
  CHECK(worst_case_samples(UncertaintyRegion::point({1, 2})).size() == 1);
  const auto pts = worst_case_samples(UncertaintyRegion::disc({1, 2}, 2.0));
  REQUIRE(pts.size() == 9);
  CHECK(pts[0] == Point2D{1, 2});
  for (std::size_t i = 1; i < 9; ++i) CHECK(distance(pts[i], Point2D{1, 2}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(worst_case_samples(UncertaintyRegion::disc({0, 0}, 1.0), 4), ValidationError);
}

TEST_CASE("worst-case robust against the averaged design") {
  SUBCASE("point regions: identical objective") {
    const Scenario s = desk(8);
    const CovarianceSet g = compute_covariance_set(s);
    const SdrOutcome avg = solve_coordinated(s, g);
    const SdrOutcome rob = solve_worstcase_robust(s, g);
    REQUIRE(avg.relaxed.report.optimal());
    REQUIRE(rob.relaxed.report.optimal());
    CHECK(std::abs(rob.relaxed.theta - avg.relaxed.theta) <= 1e-6 * avg.relaxed.theta);
  }
  SUBCASE("disc regions: robust never exceeds averaged") {
    const Scenario s = with_uncertainty_area(desk(8), std::numbers::pi);
    const CovarianceSet g = compute_covariance_set(s);
    const SdrOutcome avg = solve_coordinated(s, g);
    const SdrOutcome rob = solve_worstcase_robust(s, g);
    REQUIRE(avg.relaxed.report.optimal());
    REQUIRE(rob.relaxed.report.optimal());
    CHECK(rob.relaxed.theta <= avg.relaxed.theta + 1e-9 * avg.relaxed.theta);
    // The robust design meets the averaged constraints too.
    CHECK(rob.check.max_violation <= 1e-6);
  }
}

TEST_CASE("non-coordinated design") {
  SUBCASE("K=1 matches the coordinated design") {
    const Scenario s = subset(desk(8), 1);
    const CovarianceSet g = compute_covariance_set(s);
    const SdrOutcome co = solve_coordinated(s, g);
    const BeamformingSolution nc = solve_noncoordinated(s, g);
    REQUIRE(co.relaxed.report.optimal());
    REQUIRE(nc.report->optimal());
    CHECK((nc.info_beams[0] - co.solution.info_beams[0]).norm() == 0.0);
    CHECK((nc.dual_covariances[0] - co.solution.dual_covariances[0]).norm() == 0.0);
  }
  SUBCASE("combined Type-I SINR does not exceed the single-cell target by design") {
    const Scenario s = with_cu_type(desk(8), CuType::TypeI);
    const CovarianceSet g = compute_covariance_set(s);
    const BeamformingSolution nc = solve_noncoordinated(s, g);
    REQUIRE(nc.report->optimal());
    for (int k = 0; k < 3; ++k) {
      // Single-cell SINR counts only the own BS; the combined one adds interference.
      BeamformingSolution alone = BeamformingSolution::zero(3, 8);
      alone.info_beams[static_cast<std::size_t>(k)] = nc.info_beams[static_cast<std::size_t>(k)];
      alone.dual_covariances[static_cast<std::size_t>(k)] = nc.dual_covariances[static_cast<std::size_t>(k)];
      CHECK(sinr(nc, s, k, CuType::TypeI) <= sinr(alone, s, k, CuType::TypeI) * (1.0 + 1e-12));
    }
  }
}
