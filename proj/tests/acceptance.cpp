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

// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance            run everything
//   acceptance 2 5 9      run a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "iscap/covariance.hpp"
#include "iscap/geometry.hpp"
#include "iscap/metrics.hpp"
#include "iscap/mrt.hpp"
#include "iscap/parallel.hpp"
#include "iscap/scenario.hpp"
#include "iscap/sdr.hpp"

using namespace iscap;
using iscap::testing::random_instance;
using iscap::testing::subset;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

Scenario case3(int n, double sinr_db, double harvest_dbm, CuType type) {
  return with_cu_type(with_harvest_dbm(with_sinr_db(with_elements(builtin_case(3), n), sinr_db), harvest_dbm), type);
}

double pd_of(const BeamformingSolution& sol, const Scenario& s) { return worst_case_detection(sol, s).probability; }

// ---------------------------------------------------------------------------

Outcome c1_rayleigh() {
  const Scenario full = builtin_case(3);
  const double r64 = rayleigh_distance(full.bs[0]);
  const double r16 = rayleigh_distance(with_elements(full, 16).bs[0]);
  const bool ok = std::abs(r64 - 248.1) <= 0.1 && std::abs(r64 - 248.0625) <= 1e-9 &&
                  std::abs(r16 - 14.0625) <= 1e-9 && std::abs(r16 - 14.0) <= 0.1;
  return {ok, fmt("N=64: %.4f m, N=16: %.4f m", r64, r16)};
}

// Shared instance set for criteria 2 and 3: >= 20 random feasible draws plus case 3 at N=16.
struct Instance {
  Scenario s;
  CovarianceSet g;
};

std::vector<Instance> instance_set() {
  std::vector<Instance> out;
  std::mt19937_64 rng(20240601);
  const int ks[] = {1, 2, 3};
  const int ns[] = {4, 8, 16};
  const CuType types[] = {CuType::TypeI, CuType::TypeII, CuType::TypeIII};
  int attempts = 0;
  while (out.size() < 24 && attempts < 400) {
    const int k = ks[attempts % 3], n = ns[(attempts / 3) % 3];
    Scenario s = with_cu_type(random_instance(k, n, rng), types[attempts % 3]);
    ++attempts;
    CovarianceSet g = compute_covariance_set(s);
    // Keep draws whose relaxation is feasible for all three receiver types.
    bool feasible = true;
    for (CuType t : types) feasible = feasible && solve_sdp(build_sdr(s, g, t)).report.optimal();
    if (feasible) out.push_back({std::move(s), std::move(g)});
  }
  Scenario c3 = case3(16, 10.0, -40.0, CuType::TypeI);
  CovarianceSet g3 = compute_covariance_set(c3);
  out.push_back({std::move(c3), std::move(g3)});
  return out;
}

const std::vector<Instance>& instances() {
  static const std::vector<Instance> set = instance_set();
  return set;
}

Outcome c2_tightness() {
  const auto& set = instances();
  const CuType types[] = {CuType::TypeI, CuType::TypeII, CuType::TypeIII};
  std::vector<double> viol(set.size() * 3, 0.0), rel(set.size() * 3, 0.0);
  std::vector<int> status(set.size() * 3, 0);
  parallel_for(set.size() * 3, [&](std::size_t i) {
    const Instance& in = set[i / 3];
    const Scenario s = with_cu_type(in.s, types[i % 3]);
    const SdrOutcome o = solve_coordinated(s, in.g);
    status[i] = o.relaxed.report.optimal() ? 1 : 0;
    if (!status[i]) return;
    viol[i] = std::max(o.check.max_violation, o.check.max_psd_residual);
    rel[i] = std::abs(o.reconstructed_objective - o.relaxed.theta) / o.relaxed.theta;
  });
  const int random_count = static_cast<int>(set.size()) - 1;
  const double worst_viol = *std::max_element(viol.begin(), viol.end());
  const double worst_rel = *std::max_element(rel.begin(), rel.end());
  const bool all_opt = std::all_of(status.begin(), status.end(), [](int v) { return v == 1; });
  const bool ok = random_count >= 20 && all_opt && worst_viol <= 1e-6 && worst_rel <= 1e-6;
  return {ok, fmt("%d random + case 3 (N=16) x 3 CU types: max violation %.2e, max objective gap %.2e%s",
                  random_count, worst_viol, worst_rel, all_opt ? "" : ", some solves not optimal")};
}

Outcome c3_corollary() {
  const auto& set = instances();
  std::vector<CorollaryReport> reps(set.size());
  parallel_for(set.size(), [&](std::size_t i) { reps[i] = verify_corollary(set[i].s, set[i].g); });
  double gap = 0.0, leak = 0.0, order = 0.0;
  bool all_opt = true;
  for (const auto& r : reps) {
    all_opt = all_opt && r.all_optimal;
    gap = std::max(gap, r.relative_gap);
    for (double v : r.leakage_relative) leak = std::max(leak, v);
    // Theta_III >= Theta_II within solver tolerance: positive values are violations.
    order = std::max(order, (r.theta_type2 - r.theta_type3) / r.theta_type2);
  }
  const bool ok = all_opt && gap <= 1e-5 && leak <= 1e-6 && order <= 1e-7;
  return {ok, fmt("%zu instances: max |Theta_I - Theta_II| / Theta_I %.2e, max leakage ratio %.2e, "
                  "max (Theta_II - Theta_III) / Theta_II %.2e",
                  set.size(), gap, leak, order)};
}

Outcome c4_bruteforce() {
  struct Cfg {
    double sf, hf;
    CuType t;
  };
  const std::vector<Cfg> cfgs = {{0.3, 0.3, CuType::TypeI},   {0.3, 0.3, CuType::TypeIII}, {0.1, 0.6, CuType::TypeI},
                                 {0.6, 0.1, CuType::TypeI},   {0.6, 0.1, CuType::TypeIII}, {0.05, 0.05, CuType::TypeII}};
  std::vector<double> gaps(cfgs.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<int> above(cfgs.size(), 0);
  parallel_for(cfgs.size(), [&](std::size_t i) {
    const Scenario s = iscap::testing::tiny_instance(cfgs[i].sf, cfgs[i].hf, cfgs[i].t);
    const CovarianceSet g = compute_covariance_set(s);
    const SdpSolution r = solve_sdp(build_sdr(s, g));
    if (!r.report.optimal()) return;
    const double grid = iscap::testing::brute_force_k1n2(s);
    if (grid <= 0.0) return;
    gaps[i] = (r.theta - grid) / r.theta;
    above[i] = grid > r.theta * (1.0 + 1e-6);
  });
  double worst = 0.0;
  bool ok = true;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    if (std::isnan(gaps[i]) || above[i]) ok = false;
    else worst = std::max(worst, gaps[i]);
  }
  ok = ok && worst <= 0.01;
  return {ok, fmt("%zu K=1 N=2 M=1 instances: max (SDR - grid) / SDR %.2e%s", cfgs.size(), worst,
                  ok ? "" : " (or a grid value above the SDR bound / failed solve)")};
}

Outcome c5_quadrature() {
  const Scenario s = with_elements(builtin_case(3), 8);
  double worst = 0.0;
  bool point_exact = true;
  std::string where;
  for (int b = 0; b < 3; ++b) {
    const ArrayGeometry& g = s.bs[static_cast<std::size_t>(b)];
    const Point2D mu = s.ers[static_cast<std::size_t>(b)].region.center;
    const ComplexVector h = channel_vector(g, mu);
    point_exact = point_exact && (compute_G(g, UncertaintyRegion::point(mu)).matrix - h * h.adjoint()).cwiseAbs().maxCoeff() == 0.0;
    for (double r : {0.25, 1.0}) {
      const UncertaintyRegion reg = UncertaintyRegion::disc(mu, r);
      const HermitianMatrix q = compute_G(g, reg).matrix;
      const MonteCarloG mc = monte_carlo_G(g, reg, 1000000, 1000 + static_cast<std::uint64_t>(b));
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
          const double z = std::abs(q(i, j) - mc.mean(i, j)) / mc.standard_error(i, j);
          if (z > worst) {
            worst = z;
            where = fmt("BS %d, r=%.2f, entry (%d,%d)", b, r, i, j);
          }
        }
    }
  }
  const bool ok = point_exact && worst <= 3.0;
  return {ok, fmt("N=8, 3 BSs x r in {0.25, 1} m, 1e6 samples: max |G - MC| / SE = %.2f (%s); point G exact: %s",
                  worst, where.c_str(), point_exact ? "yes" : "no")};
}

// Checks `v` for a monotone trend with an absolute allowance.
bool monotone(const std::vector<double>& v, bool increasing, double tol) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (increasing && v[i] < v[i - 1] - tol) return false;
    if (!increasing && v[i] > v[i - 1] + tol) return false;
  }
  return true;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : " ") + fmt("%.4g", x);
  return out;
}

Outcome c6_trends() {
  const Scenario base = case3(16, 5.0, -40.0, CuType::TypeIII);
  std::vector<std::string> failures;
  std::ostringstream detail;
  auto pd_series = [&](const std::vector<Scenario>& ss) {
    std::vector<double> pd(ss.size(), std::numeric_limits<double>::quiet_NaN());
    parallel_for(ss.size(), [&](std::size_t i) {
      const CovarianceSet g = compute_covariance_set(ss[i]);
      const SdrOutcome o = solve_coordinated(ss[i], g);
      if (o.relaxed.report.optimal()) pd[i] = pd_of(o.solution, ss[i]);
    });
    return pd;
  };
  auto check = [&](const char* name, const std::vector<Scenario>& ss, bool increasing) {
    const auto pd = pd_series(ss);
    const bool all = std::none_of(pd.begin(), pd.end(), [](double v) { return std::isnan(v); });
    const bool ok = all && monotone(pd, increasing, 1e-9);
    if (!ok) failures.push_back(name);
    detail << name << " [" << join(pd) << "]; ";
  };
  {
    std::vector<Scenario> ss;
    for (double g : {0.0, 2.5, 5.0, 7.5, 10.0}) ss.push_back(with_sinr_db(base, g));
    check("Gamma", ss, false);
  }
  {
    std::vector<Scenario> ss;
    for (double om : {-50.0, -47.5, -45.0, -42.5, -40.0}) ss.push_back(with_harvest_dbm(base, om));
    check("Omega", ss, false);
  }
  {
    std::vector<Scenario> ss;
    for (double a : {0.0, 1.0, 2.0, 3.0, 4.0}) ss.push_back(with_uncertainty_area(base, a));
    check("|A|", ss, false);
  }
  {
    std::map<double, std::vector<double>> by_pfa;
    for (double pfa : {1e-4, 1e-6, 1e-8}) {
      std::vector<Scenario> ss;
      // 21 dBm is infeasible for this layout.
      for (double p : {24.0, 25.5, 27.0, 30.0, 33.0}) {
        Scenario s = base;
        s.params.power_budget = dbm_to_watt(p);
        s.params.false_alarm = pfa;
        ss.push_back(s);
      }
      const auto pd = pd_series(ss);
      by_pfa[pfa] = pd;
      const bool all = std::none_of(pd.begin(), pd.end(), [](double v) { return std::isnan(v); });
      if (!all || !monotone(pd, true, 1e-9)) failures.push_back(fmt("P_max@%g", pfa));
    }
    // Stricter false-alarm target never helps.
    for (std::size_t i = 0; i < 5; ++i)
      if (by_pfa[1e-6][i] > by_pfa[1e-4][i] + 1e-9 || by_pfa[1e-8][i] > by_pfa[1e-6][i] + 1e-9)
        failures.push_back(fmt("P_FA@P_max index %zu", i));
    detail << "P_max(P_FA=1e-4) [" << join(by_pfa[1e-4]) << "]; P_max(P_FA=1e-8) [" << join(by_pfa[1e-8]) << "]; ";
  }
  {
    const CovarianceSet g = compute_covariance_set(base);
    const double t0 = solve_sdp(build_sdr(base, g)).theta;
    double worst = 0.0;
    for (double beta : {0.1, 10.0}) {
      Scenario t = base;
      t.params.noise_comm *= beta;
      t.params.noise_sense *= beta;
      t.params.power_budget *= beta;
      for (auto& e : t.ers) e.harvest_threshold *= beta;
      const SdpSolution r = solve_sdp(build_sdr(t, g));
      worst = std::max(worst, r.report.optimal() ? std::abs(r.theta - beta * t0) / (beta * t0) : 1.0);
    }
    if (worst > 1e-6) failures.push_back("homogeneity");
    detail << fmt("homogeneity max rel. error %.2e", worst);
  }
  std::string f;
  for (const auto& x : failures) f += (f.empty() ? "" : ", ") + x;
  return {failures.empty(), "case 3, N=16, Type III, SDR: " + detail.str() + (f.empty() ? "" : "; failed: " + f)};
}

Outcome c7_ordering() {
  // Full-scale arrays (N=64): at N=16 the Gamma >= 15 dB cells are all infeasible.
  struct Cell {
    double gamma;
    CuType t;
    double sdr = std::numeric_limits<double>::quiet_NaN();
    double mrt = std::numeric_limits<double>::quiet_NaN();
    double nc = std::numeric_limits<double>::quiet_NaN();
  };
  std::vector<Cell> cells;
  for (double g : {0.0, 5.0, 10.0, 15.0, 20.0})
    for (CuType t : {CuType::TypeI, CuType::TypeIII}) cells.push_back({g, t});
  const Scenario base64 = case3(64, 0.0, -30.0, CuType::TypeI);
  const CovarianceSet g64 = compute_covariance_set(base64);
  parallel_for(cells.size(), [&](std::size_t i) {
    Cell& c = cells[i];
    const Scenario s = with_cu_type(with_sinr_db(base64, c.gamma), c.t);
    const SdrOutcome o = solve_coordinated(s, g64);
    if (o.relaxed.report.optimal()) c.sdr = pd_of(o.solution, s);
    const MrtOutcome m = solve_mrt(s, g64);
    if (m.solution.report->optimal()) c.mrt = pd_of(m.solution, s);
    const BeamformingSolution nc = solve_noncoordinated(s, g64);
    if (nc.report->optimal()) c.nc = pd_of(nc, s);
  });
  std::vector<std::string> bad;
  int compared = 0;
  std::ostringstream tab;
  for (const auto& c : cells) {
    tab << fmt("G=%g/%s sdr=%.4g mrt=%.4g nc=%.4g; ", c.gamma, to_string(c.t), c.sdr, c.mrt, c.nc);
    if (!std::isnan(c.mrt) && c.mrt < 0.0) bad.push_back(fmt("MRT<0 @G=%g", c.gamma));
    if (std::isnan(c.sdr)) continue;
    if (!std::isnan(c.mrt)) {
      ++compared;
      if (c.sdr < c.mrt - 1e-9) bad.push_back(fmt("SDR<MRT @G=%g %s", c.gamma, to_string(c.t)));
    }
    if (!std::isnan(c.nc)) {
      ++compared;
      if (c.sdr < c.nc - 1e-9) bad.push_back(fmt("SDR<NC @G=%g %s (%.4g < %.4g)", c.gamma, to_string(c.t), c.sdr, c.nc));
    }
  }
  // Robust versus averaged at desk scale.
  const Scenario b16 = case3(16, 5.0, -40.0, CuType::TypeIII);
  double eq_gap = 1.0, rob_pd = 0.0, avg_pd = 0.0;
  std::vector<double> area_rob, area_avg;
  for (double a : {0.0, 1.0, std::numbers::pi, 4.0}) {
    const Scenario s = with_uncertainty_area(b16, a);
    const CovarianceSet g = compute_covariance_set(s);
    const SdrOutcome avg = solve_coordinated(s, g);
    const SdrOutcome rob = solve_worstcase_robust(s, g);
    if (!avg.relaxed.report.optimal() || !rob.relaxed.report.optimal()) {
      bad.push_back(fmt("robust/averaged solve failed @|A|=%g", a));
      continue;
    }
    const double pa = pd_of(avg.solution, s), pr = pd_of(rob.solution, s);
    area_avg.push_back(pa);
    area_rob.push_back(pr);
    if (a == 0.0) eq_gap = std::abs(rob.relaxed.theta - avg.relaxed.theta) / avg.relaxed.theta;
    else if (pr > pa + 1e-9) bad.push_back(fmt("robust>averaged @|A|=%g", a));
    if (std::abs(a - std::numbers::pi) < 1e-12) {
      rob_pd = pr;
      avg_pd = pa;
    }
  }
  if (eq_gap > 1e-6) bad.push_back(fmt("|A|=0 robust/averaged gap %.2e", eq_gap));
  if (!(rob_pd < avg_pd)) bad.push_back("robust not strictly below averaged at |A|=pi");
  std::string f;
  for (const auto& x : bad) f += (f.empty() ? "" : ", ") + x;
  return {bad.empty() && compared > 0,
          fmt("N=64, Omega=-30 dBm, %d comparisons: ", compared) + tab.str() +
              fmt("robust vs averaged (N=16) P_D avg [%s] rob [%s], |A|=0 gap %.2e",
                  join(area_avg).c_str(), join(area_rob).c_str(), eq_gap) +
              (f.empty() ? "" : "; failed: " + f)};
}

Outcome c8_mrt_asymptotics() {
  const std::vector<int> ns = {16, 32, 64, 128};
  std::vector<double> gap(ns.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<int> feas(ns.size(), 0);
  parallel_for(ns.size(), [&](std::size_t i) {
    const Scenario s = case3(ns[i], 0.0, -40.0, CuType::TypeIII);
    const CovarianceSet g = compute_covariance_set(s);
    const MrtOutcome lp = solve_mrt(s, g);
    const MrtOutcome cf = solve_mrt_asymptotic(s, g);
    feas[i] = asymptotic_feasible(cf.allocation, s.params.power_budget);
    if (lp.solution.report->optimal() && cf.solution.report->optimal())
      gap[i] = std::abs(lp.allocation.theta - cf.allocation.theta) / lp.allocation.theta;
  });
  const bool all = std::none_of(gap.begin(), gap.end(), [](double v) { return std::isnan(v); }) &&
                   std::all_of(feas.begin(), feas.end(), [](int v) { return v == 1; });
  // Trend: the final gap does not exceed the first and no step rises by more than 0.01.
  bool trend = all && gap.back() <= gap.front();
  for (std::size_t i = 1; all && i < gap.size(); ++i) trend = trend && gap[i] <= gap[i - 1] + 0.01;
  const bool ok = all && trend && gap.back() <= 0.05;
  return {ok, fmt("case 3, Type III, Gamma=0 dB, Omega=-40 dBm, N=16..128: relative gap [%s]; closed form feasible at all N: %s",
                  join(gap).c_str(), std::all_of(feas.begin(), feas.end(), [](int v) { return v == 1; }) ? "yes" : "no")};
}

Outcome c9_kernel() {
  const double pfa = 1e-4, s2 = dbm_to_watt(-97);
  const double at0 = detection_probability(0.0, s2, pfa);
  const double x = q_inverse(pfa);
  const double half = detection_probability(x * x * s2 / 2.0, s2, pfa);
  const bool ok = at0 == pfa && std::abs(half - 0.5) <= 1e-12 && std::abs(x - 3.7190) <= 1e-4;
  return {ok, fmt("P_D(0) - P_FA = %.1e, P_D at threshold = %.15f, Q^-1(1e-4) = %.6f", at0 - pfa, half, x)};
}

Outcome c10_power_map() {
  // Gamma=20 dB is infeasible at N=16 for this layout, so the check runs at N=64.
  const Scenario s = case3(64, 20.0, -35.0, CuType::TypeI);
  const CovarianceSet g = compute_covariance_set(s);
  const SdrOutcome co = solve_coordinated(s, g);
  const BeamformingSolution nc = solve_noncoordinated(s, g);
  if (!co.relaxed.report.optimal()) return {false, "coordinated design not optimal: " + co.relaxed.report.message};
  auto margins = [&](const BeamformingSolution& sol) {
    // For each BS: intended-CU power over the strongest unintended-CU power, dB.
    std::vector<double> m;
    for (int k = 0; k < 3; ++k) {
      const double own = received_power(sol, s, k, s.cus[static_cast<std::size_t>(k)].position);
      for (int j = 0; j < 3; ++j)
        if (j != k) m.push_back(10.0 * std::log10(own / received_power(sol, s, k, s.cus[static_cast<std::size_t>(j)].position)));
    }
    return m;
  };
  const auto mc = margins(co.solution);
  const double worst_co = *std::min_element(mc.begin(), mc.end());
  bool nc_fails = false;
  double worst_nc = std::numeric_limits<double>::quiet_NaN();
  if (nc.report->optimal()) {
    const auto mn = margins(nc);
    worst_nc = *std::min_element(mn.begin(), mn.end());
    nc_fails = worst_nc < 20.0;
  }
  const bool ok = worst_co >= 20.0 && nc_fails;
  return {ok, fmt("N=64, Gamma=20 dB, Omega=-35 dBm, Type I: smallest intended/unintended margin coordinated %.1f dB, "
                  "non-coordinated %.1f dB",
                  worst_co, worst_nc)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> all = {
      {"rayleigh distance", c1_rayleigh},
      {"SDR tightness", c2_tightness},
      {"Type I / Type II equality", c3_corollary},
      {"brute-force oracle", c4_bruteforce},
      {"quadrature vs Monte Carlo", c5_quadrature},
      {"monotone trends", c6_trends},
      {"method ordering", c7_ordering},
      {"MRT asymptotics", c8_mrt_asymptotics},
      {"detection kernel", c9_kernel},
      {"power-map nulls", c10_power_map},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, all[i].first,
                o.detail.c_str(), sec);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
