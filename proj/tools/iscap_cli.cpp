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

// iscap: sweeps, power maps, invariant checks and SDPA export.
//
// Exit codes: 0 success, 2 validation or I/O error, 3 solver failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "iscap/error.hpp"
#include "iscap/experiments.hpp"
#include "iscap/geometry.hpp"
#include "iscap/metrics.hpp"
#include "iscap/mrt.hpp"
#include "iscap/sdr.hpp"

namespace fs = std::filesystem;
using namespace iscap;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kDeskElements = 16;

struct Common {
  int case_id = 3;
  std::string config;
  std::vector<std::string> cu_types;
  std::vector<std::string> methods;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  double tol = kDefaultSdpTol;
  bool full_scale = false;
  std::optional<int> elements;
  std::optional<double> sinr_db, harvest_dbm, area_m2, pmax_dbm, pfa;
  unsigned workers = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--case", c.case_id, "built-in layout 1, 2 or 3")->check(CLI::Range(1, 3));
  app->add_option("--config", c.config, "scenario JSON file (overrides --case)");
  app->add_option("--cu-type", c.cu_types, "CU type(s): I, II, III")->delimiter(',');
  app->add_option("--method", c.methods,
                  "method(s): sdr, mrt, mrt-asymptotic, noncoordinated, worstcase-robust")
      ->delimiter(',');
  app->add_option("--out-dir", c.out_dir, "output directory");
  app->add_option("--seed", c.seed, "seed for randomized checks");
  app->add_option("--tol", c.tol, "interior-point tolerance")->check(CLI::PositiveNumber);
  app->add_flag("--full-scale", c.full_scale, "keep the scenario's element count (N = 64 for the built-in cases)");
  app->add_option("--elements", c.elements, "override the element count")->check(CLI::PositiveNumber);
  app->add_option("--sinr-db", c.sinr_db, "SINR threshold, dB");
  app->add_option("--harvest-dbm", c.harvest_dbm, "harvest threshold at full scale, dBm");
  app->add_option("--area", c.area_m2, "ER uncertainty area, m^2");
  app->add_option("--pmax-dbm", c.pmax_dbm, "per-BS power budget, dBm");
  app->add_option("--pfa", c.pfa, "false-alarm probability");
  app->add_option("--workers", c.workers, "worker threads (0: all cores)");
}

// Harvest offset applied at reduced N: the best single-beam harvest scales
// with ||h||^2, i.e. linearly in N.
double harvest_offset_db(int n_used, int n_file) {
  return 10.0 * std::log10(static_cast<double>(n_used) / n_file);
}

struct Prepared {
  Scenario scenario;
  int n_file = 0;
  double omega_offset_db = 0.0;
};

Prepared prepare(const Common& c) {
  Prepared p;
  p.scenario = c.config.empty() ? builtin_case(c.case_id) : load_scenario_file(c.config);
  p.n_file = p.scenario.elements();
  int n = p.n_file;
  if (c.elements) n = *c.elements;
  else if (!c.full_scale) n = std::min(n, kDeskElements);
  if (n != p.n_file) {
    p.scenario = with_elements(p.scenario, n);
    p.omega_offset_db = harvest_offset_db(n, p.n_file);
    const double omega = watt_to_dbm(p.scenario.ers.front().harvest_threshold);
    p.scenario = with_harvest_dbm(p.scenario, omega + p.omega_offset_db);
  }
  if (c.sinr_db) p.scenario = with_sinr_db(p.scenario, *c.sinr_db);
  if (c.harvest_dbm) p.scenario = with_harvest_dbm(p.scenario, *c.harvest_dbm + p.omega_offset_db);
  if (c.area_m2) p.scenario = with_uncertainty_area(p.scenario, *c.area_m2);
  if (c.pmax_dbm) p.scenario = with_power_budget_dbm(p.scenario, *c.pmax_dbm);
  if (c.pfa) p.scenario = apply_parameter(p.scenario, SweepParameter::FalseAlarm, *c.pfa);
  if (c.cu_types.size() == 1) p.scenario = with_cu_type(p.scenario, parse_cu_type(c.cu_types.front()));
  p.scenario.validate();
  return p;
}

void ensure_dir(const std::string& d) {
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw IoError(d, "cannot create directory: " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(path, "cannot open for writing");
  f << text;
}

// ---------------------------------------------------------------- sweep

struct NamedSweep {
  std::string name;
  SweepSpec spec;
};

std::vector<NamedSweep> preset(const std::string& name) {
  using M = Method;
  const std::vector<CuType> all_types = {CuType::TypeI, CuType::TypeII, CuType::TypeIII};
  std::vector<NamedSweep> out;
  SweepSpec s;
  s.cu_types = all_types;
  if (name == "sinr") {
    s.parameter = SweepParameter::SinrDb;
    s.grid = {0, 5, 10, 15, 20};
    s.fixed = {{SweepParameter::HarvestDbm, -30}, {SweepParameter::UncertaintyArea, 0}};
    s.methods = {M::SDR, M::MRT, M::MRTAsymptotic, M::NonCoordinated};
    out.push_back({"sweep_sinr", s});
  } else if (name == "area") {
    s.parameter = SweepParameter::UncertaintyArea;
    s.grid = {0, 1, 2, 3, 4};
    s.fixed = {{SweepParameter::HarvestDbm, -30}, {SweepParameter::SinrDb, 10}};
    s.methods = {M::SDR, M::MRT, M::WorstCaseRobust};
    out.push_back({"sweep_area", s});
  } else if (name == "harvest") {
    s.parameter = SweepParameter::HarvestDbm;
    s.grid = {-40, -37.5, -35, -32.5, -30};
    s.fixed = {{SweepParameter::SinrDb, 10}, {SweepParameter::UncertaintyArea, 0}};
    s.methods = {M::SDR, M::MRT, M::MRTAsymptotic};
    out.push_back({"sweep_harvest", s});
  } else if (name == "power") {
    s.parameter = SweepParameter::PowerBudgetDbm;
    s.grid = {21, 24, 27, 30, 33};
    s.methods = {M::SDR, M::MRT};
    for (double pfa : {1e-4, 1e-6, 1e-8}) {
      s.fixed = {{SweepParameter::SinrDb, 10},
                 {SweepParameter::HarvestDbm, -36.55},
                 {SweepParameter::UncertaintyArea, 0},
                 {SweepParameter::FalseAlarm, pfa}};
      char buf[48];
      std::snprintf(buf, sizeof buf, "sweep_power_pfa%.0e", pfa);
      out.push_back({buf, s});
    }
  } else {
    throw ValidationError("preset", "unknown preset '" + name + "' (sinr, area, harvest, power)");
  }
  return out;
}

int run_sweep_cmd(const Common& c, const std::string& preset_name, const std::string& param,
                  const std::vector<double>& grid) {
  const Prepared prep = prepare(c);
  std::vector<NamedSweep> sweeps;
  if (!param.empty()) {
    NamedSweep ns{"sweep_" + std::string(to_string(parse_sweep_parameter(param))), {}};
    ns.spec.parameter = parse_sweep_parameter(param);
    ns.spec.grid = grid;
    ns.spec.methods = {Method::SDR, Method::MRT};
    ns.spec.cu_types = {CuType::TypeIII};
    sweeps.push_back(ns);
  } else {
    sweeps = preset(preset_name);
  }
  int failures = 0;
  ensure_dir(c.out_dir);
  nlohmann::json meta;
  meta["scenario"] = nlohmann::json::parse(serialize_scenario(prep.scenario));
  meta["elements"] = prep.scenario.elements();
  meta["harvest_offset_db"] = prep.omega_offset_db;
  meta["seed"] = c.seed;
  meta["tol"] = c.tol;
  for (auto& ns : sweeps) {
    SweepSpec& spec = ns.spec;
    if (!c.methods.empty()) {
      spec.methods.clear();
      for (const auto& m : c.methods) spec.methods.push_back(parse_method(m));
    }
    if (!c.cu_types.empty()) {
      spec.cu_types.clear();
      for (const auto& t : c.cu_types) spec.cu_types.push_back(parse_cu_type(t));
    }
    spec.tol = c.tol;
    spec.workers = c.workers;
    // Values given on the command line win over the preset's fixed ones.
    std::erase_if(spec.fixed, [&](const auto& f) {
      switch (f.first) {
        case SweepParameter::SinrDb: return c.sinr_db.has_value();
        case SweepParameter::HarvestDbm: return c.harvest_dbm.has_value();
        case SweepParameter::UncertaintyArea: return c.area_m2.has_value();
        case SweepParameter::PowerBudgetDbm: return c.pmax_dbm.has_value();
        case SweepParameter::FalseAlarm: return c.pfa.has_value();
      }
      return false;
    });
    // Harvest thresholds are quoted at full scale.
    for (auto& [p, v] : spec.fixed)
      if (p == SweepParameter::HarvestDbm) v += prep.omega_offset_db;
    if (spec.parameter == SweepParameter::HarvestDbm)
      for (auto& v : spec.grid) v += prep.omega_offset_db;

    const SweepTable t = run_sweep(spec, prep.scenario);
    emit_csv(sweep_csv(t), (fs::path(c.out_dir) / (ns.name + ".csv")).string());
    emit_csv(sweep_timing_csv(t), (fs::path(c.out_dir) / (ns.name + "_timing.csv")).string());
    const int fail = t.count(SolveStatus::NumericalFailure);
    failures += fail;
    std::cout << ns.name << ": " << t.rows.size() << " cells, " << t.count(SolveStatus::Optimal)
              << " optimal, " << t.count(SolveStatus::Infeasible) << " infeasible, " << fail
              << " failed\n";
    nlohmann::json js;
    js["parameter"] = to_string(spec.parameter);
    js["grid"] = spec.grid;
    for (const auto& m : spec.methods) js["methods"].push_back(to_string(m));
    for (const auto& ty : spec.cu_types) js["cu_types"].push_back(to_string(ty));
    for (const auto& [p, v] : spec.fixed) js["fixed"][to_string(p)] = v;
    meta["sweeps"][ns.name] = js;
  }
  write_text((fs::path(c.out_dir) / "run.json").string(), meta.dump(2) + "\n");
  return failures > 0 ? kExitSolver : 0;
}

// ---------------------------------------------------------------- powermap

int run_powermap_cmd(const Common& c, int nx, int ny) {
  const Prepared prep = prepare(c);
  const Scenario& s = prep.scenario;
  const CovarianceSet gset = compute_covariance_set(s);
  const std::vector<std::string> methods = c.methods.empty() ? std::vector<std::string>{"sdr", "noncoordinated"}
                                                             : c.methods;
  ensure_dir(c.out_dir);
  PowerMapSpec spec;
  spec.nx = nx;
  spec.ny = ny;
  int failures = 0;
  const ChannelTable ch = ChannelTable::build(s);
  for (const auto& mname : methods) {
    const Method m = parse_method(mname);
    BeamformingSolution sol;
    switch (m) {
      case Method::SDR: sol = solve_coordinated(s, gset, c.tol).solution; break;
      case Method::MRT: sol = solve_mrt(s, gset).solution; break;
      case Method::MRTAsymptotic: sol = solve_mrt_asymptotic(s, gset).solution; break;
      case Method::NonCoordinated: sol = solve_noncoordinated(s, gset, c.tol); break;
      case Method::WorstCaseRobust: sol = solve_worstcase_robust(s, gset, 9, c.tol).solution; break;
    }
    const SolveReport& rep = *sol.report;
    std::cout << to_string(m) << ": " << to_string(rep.status);
    if (!rep.optimal()) {
      std::cout << " (" << rep.message << ")\n";
      if (rep.status == SolveStatus::NumericalFailure) ++failures;
      continue;
    }
    std::cout << "\n";
    const PowerMap pm = power_map(sol, s, spec);
    const std::string stem = std::string("powermap_") + to_string(m);
    emit_csv(power_map_csv(pm), (fs::path(c.out_dir) / (stem + ".csv")).string());
    for (std::size_t b = 0; b < pm.bs.size(); ++b) {
      emit_heatmap(pm, b, s, (fs::path(c.out_dir) / (stem + "_bs" + std::to_string(pm.bs[b] + 1) + ".svg")).string());
      // Point values: served CU against the strongest unintended CU.
      const int k = pm.bs[b];
      const double own = received_power(sol, s, k, s.cus[static_cast<std::size_t>(k)].position);
      double leak = 0.0;
      for (int j = 0; j < s.num_bs(); ++j)
        if (j != k) leak = std::max(leak, received_power(sol, s, k, s.cus[static_cast<std::size_t>(j)].position));
      std::printf("  BS %d: served CU %.2f dBm, worst unintended CU %.2f dBm, margin %.1f dB\n", k + 1,
                  watt_to_dbm(own), watt_to_dbm(leak), 10.0 * std::log10(own / leak));
    }
  }
  return failures > 0 ? kExitSolver : 0;
}

// ---------------------------------------------------------------- verify

int run_verify_cmd(const Common& c) {
  const Prepared prep = prepare(c);
  const auto checks = run_verify(prep.scenario, c.tol, c.seed);
  bool ok = true;
  for (const auto& v : checks) {
    std::cout << (v.passed ? "PASS " : "FAIL ") << v.name << ": " << v.detail << "\n";
    ok = ok && v.passed;
  }
  return ok ? 0 : kExitSolver;
}

// ---------------------------------------------------------------- export

int run_export_cmd(const Common& c, std::string output) {
  const Prepared prep = prepare(c);
  const CovarianceSet gset = compute_covariance_set(prep.scenario);
  if (output.empty()) {
    ensure_dir(c.out_dir);
    output = (fs::path(c.out_dir) / "problem.dat-s").string();
  }
  const ConicProblem p = build_sdr(prep.scenario, gset);
  export_sdpa(p, output);
  std::cout << "wrote " << output << " (" << p.constraint_count() << " rows, " << p.num_blocks()
            << " blocks of size " << 2 * p.dim << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coordinated near-field ISCAP beamforming: sweeps, power maps, checks"};
  app.require_subcommand(1);
  Common c;

  auto* sweep = app.add_subcommand("sweep", "parameter sweep over methods and CU types");
  add_common(sweep, c);
  std::string preset_name = "sinr", param;
  std::vector<double> grid;
  sweep->add_option("--preset", preset_name, "sinr, area, harvest or power");
  sweep->add_option("--param", param, "custom swept parameter (with --grid)");
  sweep->add_option("--grid", grid, "custom grid values")->delimiter(',');

  auto* pmap = app.add_subcommand("powermap", "received-power maps per BS");
  add_common(pmap, c);
  int nx = 180, ny = 160;
  pmap->add_option("--nx", nx, "cells along x")->check(CLI::PositiveNumber);
  pmap->add_option("--ny", ny, "cells along y")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "quick invariant suite on one scenario");
  add_common(verify, c);

  auto* exp = app.add_subcommand("export-sdpa", "write the relaxation in SDPA sparse format");
  add_common(exp, c);
  std::string output;
  exp->add_option("-o,--output", output, "output path (default <out-dir>/problem.dat-s)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (sweep->parsed()) {
      if (!param.empty() && grid.empty()) throw ValidationError("grid", "--param needs --grid");
      return run_sweep_cmd(c, preset_name, param, grid);
    }
    if (pmap->parsed()) return run_powermap_cmd(c, nx, ny);
    if (verify->parsed()) return run_verify_cmd(c);
    if (exp->parsed()) return run_export_cmd(c, output);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}
