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

#include <random>

#include "helpers.hpp"
#include "iscap/error.hpp"
#include "iscap/metrics.hpp"
#include "iscap/mrt.hpp"
#include "iscap/sdr.hpp"

using namespace iscap;
using iscap::testing::subset;

namespace {

// At N = 16 the fixed MRT directions cannot meet 10 dB alongside Omega = -40 dBm.
Scenario desk(int n, double harvest_dbm = -40.0, double sinr_db = 5.0) {
  return with_sinr_db(with_harvest_dbm(with_elements(builtin_case(3), n), harvest_dbm), sinr_db);
}

}  // namespace

TEST_CASE("beam directions are unit norm and A_k is PSD") {
  const Scenario s = desk(16);
  const CovarianceSet g = compute_covariance_set(s);
  const BeamDirections d = beam_directions(s, g);
  REQUIRE(d.info.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(d.info[k].norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.energy[k].norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.sensing[k].norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(psd_residual(d.round_trip[k]) <= 1e-9 * d.round_trip[k].norm());
  }
}

TEST_CASE("sensing direction maximizes the Rayleigh quotient") {
  const Scenario s = desk(16);
  const CovarianceSet g = compute_covariance_set(s);
  const BeamDirections d = beam_directions(s, g);
  std::mt19937_64 rng(99);
  for (std::size_t k = 0; k < 3; ++k) {
    const HermitianMatrix& a = d.round_trip[k];
    const double top = std::real(d.sensing[k].dot(a * d.sensing[k]));
    for (int i = 0; i < 100; ++i) {
      const ComplexVector u = iscap::testing::random_vector(16, rng).normalized();
      CHECK(std::real(u.dot(a * u)) <= top * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("rank-one special cases of the directions") {
  Scenario s = desk(8);
  s.sensing.points = {s.sensing.center};
  const CovarianceSet g = compute_covariance_set(s);
  const BeamDirections d = beam_directions(s, g);
  for (std::size_t k = 0; k < 3; ++k) {
    const ComplexVector hs = channel_vector(s.bs[k], s.sensing.center).conjugate();
    CHECK(std::abs(d.sensing[k].dot(hs)) == doctest::Approx(hs.norm()).epsilon(1e-10));
    const ComplexVector he = channel_vector(s.bs[k], s.ers[k].region.center);
    CHECK(std::abs(d.energy[k].dot(he)) == doctest::Approx(he.norm()).epsilon(1e-10));
  }
}

TEST_CASE("LP size and MRT solution consistency") {
  const Scenario s = desk(16);
  const CovarianceSet g = compute_covariance_set(s);
  const MrtOutcome o = solve_mrt(s, g);
  REQUIRE(o.solution.report->optimal());
  CHECK(o.solution.report->activities.size() == 5 + 3 * 3);
  const double p = s.params.power_budget;
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(o.allocation.rho_c[k] >= 0.0);
    CHECK(o.allocation.rho_e[k] >= 0.0);
    CHECK(o.allocation.rho_s[k] >= 0.0);
    CHECK(o.allocation.rho_c[k] + o.allocation.rho_e[k] + o.allocation.rho_s[k] <= p + 1e-9);
  }
  // The converted solution meets the unrelaxed constraints the LP enforced.
  const FeasibilityCheck chk = check_unrelaxed(o.solution, s, g, o.allocation.theta);
  CHECK(chk.max_violation <= 1e-8);
  CHECK(chk.min_echo >= o.allocation.theta * (1.0 - 1e-8));
}

TEST_CASE("pure-sensing corner") {
  Scenario s = subset(desk(8), 1);
  s.sensing.points = {s.sensing.center};
  s.cus[0].sinr_threshold = 1e-12;
  s.ers[0].harvest_threshold = 1e-18;
  const CovarianceSet g = compute_covariance_set(s);
  const MrtOutcome o = solve_mrt(s, g);
  REQUIRE(o.solution.report->optimal());
  const double expect = s.params.power_budget * principal_eigenpair(o.directions.round_trip[0]).value;
  CHECK(o.allocation.theta == doctest::Approx(expect).epsilon(1e-6));
  CHECK(o.allocation.rho_s[0] == doctest::Approx(s.params.power_budget).epsilon(1e-6));
}

TEST_CASE("closed-form allocation") {
  SUBCASE("rho_c = Gamma sigma^2 / ||h||^2 = 0.1 W") {
    Scenario s = subset(desk(16), 1);
    s.params.noise_comm = 1e-8;
    s.cus[0].sinr_threshold = 10.0;
    // Place the CU on the boresight where ||h||^2 = 1e-6.
    const ArrayGeometry& bs = s.bs[0];
    const Point2D dir{std::cos(bs.boresight), std::sin(bs.boresight)};
    double lo = 5.0, hi = 200.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double n2 = channel_vector(bs, Point2D{bs.center.x + mid * dir.x, bs.center.y + mid * dir.y}).squaredNorm();
      (n2 > 1e-6 ? lo : hi) = mid;
    }
    s.cus[0].position = {bs.center.x + lo * dir.x, bs.center.y + lo * dir.y};
    const CovarianceSet g = compute_covariance_set(s);
    const BeamDirections d = beam_directions(s, g);
    const PowerAllocation a = closed_form_asymptotic(s, g, d);
    CHECK(a.rho_c[0] == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(a.rho_c[0] + a.rho_e[0] + a.rho_s[0] == doctest::Approx(s.params.power_budget).epsilon(1e-15));
  }
  SUBCASE("Omega -> 0 puts the remainder on sensing") {
    Scenario s = desk(16);
    for (auto& e : s.ers) e.harvest_threshold = 0.0;
    const CovarianceSet g = compute_covariance_set(s);
    const PowerAllocation a = closed_form_asymptotic(s, g, beam_directions(s, g));
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(a.rho_e[k] == 0.0);
      CHECK(a.rho_s[k] == doctest::Approx(s.params.power_budget - a.rho_c[k]).epsilon(1e-15));
    }
  }
  SUBCASE("K=1: Type-III SINR met with equality, energy beam alone meets the harvest target") {
    Scenario s = with_cu_type(subset(desk(16), 1), CuType::TypeIII);
    const CovarianceSet g = compute_covariance_set(s);
    const MrtOutcome o = solve_mrt_asymptotic(s, g);
    REQUIRE(o.solution.report->optimal());
    CHECK(o.solution.report->asymptotic_approximation);
    CHECK(sinr(o.solution, s, 0, CuType::TypeIII) == doctest::Approx(s.cus[0].sinr_threshold).epsilon(1e-9));
    const double from_energy =
        s.params.eh_efficiency * o.allocation.rho_e[0] *
        std::real(o.directions.energy[0].dot(g.at(0, 0) * o.directions.energy[0]));
    CHECK(from_energy == doctest::Approx(s.ers[0].harvest_threshold).epsilon(1e-9));
    CHECK(avg_harvested_power(o.solution, s, g, 0) >= s.ers[0].harvest_threshold * (1.0 - 1e-9));
  }
}

TEST_CASE("feasibility screen") {
  const double p = 2.0;
  auto alloc = [](double c, double e) {
    PowerAllocation a;
    a.rho_c = {c};
    a.rho_e = {e};
    a.rho_s = {0.0};
    return a;
  };
  CHECK(asymptotic_feasible(alloc(p / 4, p / 4), p));
  CHECK_FALSE(asymptotic_feasible(alloc(0.6 * p, 0.6 * p), p));
  CHECK(asymptotic_feasible(alloc(p, 0.0), p));
  CHECK_FALSE(asymptotic_feasible(alloc(1.01 * p, 0.0), p));
}

TEST_CASE("negative allocation is rejected") {
  const Scenario s = desk(4);
  const CovarianceSet g = compute_covariance_set(s);
  const BeamDirections d = beam_directions(s, g);
  PowerAllocation a;
  a.rho_c = {0.1, 0.1, 0.1};
  a.rho_e = {0.1, -0.1, 0.1};
  a.rho_s = {0.1, 0.1, 0.1};
  CHECK_THROWS_AS(to_solution(a, d), ContractViolation);
}

TEST_CASE("MRT never beats the SDR optimum") {
  const Scenario base = desk(16);
  const CovarianceSet g = compute_covariance_set(base);
  for (CuType t : {CuType::TypeI, CuType::TypeII, CuType::TypeIII}) {
    const Scenario s = with_cu_type(base, t);
    const MrtOutcome m = solve_mrt(s, g);
    const SdpSolution r = solve_sdp(build_sdr(s, g));
    REQUIRE(r.report.optimal());
    if (!m.solution.report->optimal()) continue;
    CHECK(m.allocation.theta <= r.theta * (1.0 + 1e-7) + 1e-9 * r.theta);
  }
}

TEST_CASE("LP optimum is monotone in the thresholds") {
  const Scenario s = with_cu_type(desk(16), CuType::TypeIII);
  const CovarianceSet g = compute_covariance_set(s);
  double prev = std::numeric_limits<double>::infinity();
  for (double gdb : {-5.0, 0.0, 5.0}) {
    const MrtOutcome o = solve_mrt(with_sinr_db(s, gdb), g);
    REQUIRE(o.solution.report->optimal());
    CHECK(o.allocation.theta <= prev * (1.0 + 1e-7));
    prev = o.allocation.theta;
  }
  prev = std::numeric_limits<double>::infinity();
  for (double om : {-55.0, -50.0, -45.0}) {
    const MrtOutcome o = solve_mrt(with_sinr_db(with_harvest_dbm(s, om), 0.0), g);
    REQUIRE(o.solution.report->optimal());
    CHECK(o.allocation.theta <= prev * (1.0 + 1e-7));
    prev = o.allocation.theta;
  }
}
