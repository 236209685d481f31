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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iscap/conic.hpp"
#include "iscap/covariance.hpp"
#include "iscap/scenario.hpp"
#include "iscap/sdr.hpp"
#include "iscap/solution.hpp"

namespace iscap {

enum class Method { SDR, MRT, MRTAsymptotic, NonCoordinated, WorstCaseRobust };
const char* to_string(Method m);
Method parse_method(std::string_view s);

enum class SweepParameter { SinrDb, HarvestDbm, UncertaintyArea, PowerBudgetDbm, FalseAlarm };
/// Column name, e.g. "sinr_threshold_db".
const char* to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view s);
/// Returns a copy of `s` with the parameter set to `value` (dB, dBm, m^2 or a probability).
Scenario apply_parameter(const Scenario& s, SweepParameter p, double value);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::SinrDb;
  std::vector<double> grid;
  /// Applied before the swept value.
  std::vector<std::pair<SweepParameter, double>> fixed;
  std::vector<Method> methods = {Method::SDR};
  std::vector<CuType> cu_types = {CuType::TypeIII};
  double tol = kDefaultSdpTol;
  unsigned workers = 0;  // 0: hardware concurrency
  void validate() const;
};

struct SweepRow {
  int grid_index = 0;
  double value = 0.0;
  Method method = Method::SDR;
  CuType cu_type = CuType::TypeI;
  SolveStatus status = SolveStatus::NumericalFailure;
  double theta = 0.0;       // min_m phi_m of the returned solution, W
  double detection = 0.0;   // worst-case P_D
  int worst_point = 0;
  double max_violation = 0.0;  // relative, against the unrelaxed problem
  std::vector<ConstraintActivity> slacks;
  std::string message;
  double seconds = 0.0;
};

struct SweepTable {
  SweepParameter parameter = SweepParameter::SinrDb;
  /// Row order: grid index, then method, then CU type, in SweepSpec order.
  std::vector<SweepRow> rows;
  int count(SolveStatus st) const;
};

/// Solves one scenario with one method; the row is keyed by the caller.
SweepRow solve_cell(const Scenario& s, const CovarianceSet& gset, Method method, double tol,
                    BeamformingSolution* solution = nullptr);

/// Every grid point x method x CU type, solved on a bounded worker pool.
/// Solver exceptions are caught per cell and recorded as failures.
SweepTable run_sweep(const SweepSpec& spec, const Scenario& base);

struct PowerMapSpec {
  Point2D lower{0.0, 0.0};
  Point2D upper{90.0, 80.0};
  int nx = 90;
  int ny = 80;
  /// Empty: every BS.
  std::vector<int> bs;
  void validate() const;
  Point2D cell_center(int ix, int iy) const;
};

struct PowerMap {
  PowerMapSpec spec;
  std::vector<int> bs;
  /// values[b](iy, ix), W. Cells containing an array element are NaN.
  std::vector<Eigen::MatrixXd> values;
  bool invalid(std::size_t b, int ix, int iy) const;
};

PowerMap power_map(const BeamformingSolution& sol, const Scenario& s, const PowerMapSpec& spec);

/// Plain string table; numbers are written with 17 significant digits.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string format_number(double v);
double parse_number(const std::string& s);

CsvTable sweep_csv(const SweepTable& t);
/// grid_index, method, cu_type, seconds: kept apart so the main CSV is reproducible.
CsvTable sweep_timing_csv(const SweepTable& t);
CsvTable power_map_csv(const PowerMap& m);

void write_csv(const CsvTable& t, std::ostream& os);
CsvTable read_csv(std::istream& is);
void emit_csv(const CsvTable& t, const std::string& path);
CsvTable load_csv(const std::string& path);

/// SVG heat map of one BS's map in dB relative to the map maximum, with
/// markers for BSs, CUs, ER regions and sensing points.
std::string heatmap_svg(const PowerMap& m, std::size_t b, const Scenario& s);
void emit_heatmap(const PowerMap& m, std::size_t b, const Scenario& s, const std::string& path);

/// SDPA sparse format (.dat-s). The embedded problem min <C,X> s.t.
/// <A_i,X> = b_i, X in the cone, is written as the SDPA dual
/// max <F0,Y> s.t. <F_i,Y> = c_i with F0 = -C, F_i = A_i, c_i = b_i.
void write_sdpa(const conic::Problem& p, std::ostream& os, const std::string& comment = "");
conic::Problem read_sdpa(std::istream& is);
/// Adds a header comment describing the block layout and scaling.
void write_sdpa(const ConicProblem& p, std::ostream& os);
void export_sdpa(const ConicProblem& p, const std::string& path);
void export_sdpa(const conic::Problem& p, const std::string& path, const std::string& comment = "");
conic::Problem import_sdpa(const std::string& path);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick invariant suite on one scenario: channel and kernel identities,
/// SDR tightness, Type-I / Type-II equality, MRT and non-coordinated ordering,
/// and monotonicity of P_D in Gamma.
std::vector<VerifyCheck> run_verify(const Scenario& s, double tol = kDefaultSdpTol,
                                    std::uint64_t seed = 1);

}  // namespace iscap
