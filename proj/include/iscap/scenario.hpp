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
#include <string>
#include <string_view>
#include <vector>

#include "iscap/geometry.hpp"
#include "iscap/region.hpp"

namespace iscap {

inline constexpr double kSpeedOfLight = 3.0e8;  // m/s, nominal
inline constexpr int kSchemaVersion = 1;

/// Physical constants and thresholds shared by every BS. All powers in W.
struct SystemParams {
  double carrier_frequency = 2.4e9;  // Hz
  double rcs_magnitude = 1.0;        // |zeta|
  double eh_efficiency = 0.7;        // eta
  double noise_comm = 1e-8;          // sigma_c^2, -50 dBm
  double noise_sense = 0.0;          // sigma_s^2, set to -97 dBm by defaults()
  double power_budget = 0.0;         // P_max, set to 27 dBm by defaults()
  double false_alarm = 1e-4;         // P_FA

  static SystemParams defaults();
  double wavelength() const { return kSpeedOfLight / carrier_frequency; }
  void validate() const;
};

/// Interference-cancellation capability of a communication user.
enum class CuType { TypeI, TypeII, TypeIII };

const char* to_string(CuType t);
/// Accepts "I"/"II"/"III", "1"/"2"/"3" and "TypeI".. forms.
CuType parse_cu_type(std::string_view s);

struct CuSpec {
  Point2D position;
  double sinr_threshold = 10.0;  // linear ratio
  CuType type = CuType::TypeI;
};

struct ErSpec {
  UncertaintyRegion region;
  double harvest_threshold = 1e-6;  // W
};

struct SensingArea {
  Point2D center;
  double side = 3.0;
  std::vector<Point2D> points;
};

/// A complete network instance. BS k serves CU k and ER k.
struct Scenario {
  SystemParams params;
  std::vector<ArrayGeometry> bs;
  std::vector<CuSpec> cus;
  std::vector<ErSpec> ers;
  SensingArea sensing;
  /// Human-readable provenance, e.g. "case 3 (CU positions approximate, figure-derived)".
  std::string label;

  int num_bs() const { return static_cast<int>(bs.size()); }
  int elements() const { return bs.empty() ? 0 : bs.front().elements; }
  double wavelength() const { return params.wavelength(); }

  /// Throws ValidationError naming the first offending field.
  void validate() const;
};

/// M = 1: the center. M = 5: center plus (+-side/4, +-side/4) offsets.
/// Other M throw ValidationError (explicit point lists go through the config).
std::vector<Point2D> discretize_sensing_area(Point2D center, double side, int m);

/// Parse and validate a JSON scenario document. Missing optional fields take
/// the system defaults; a "case" key starts from the matching built-in layout.
Scenario load_scenario(std::string_view document);
Scenario load_scenario_file(const std::string& path);

/// Lossless JSON form (W, linear ratios, radians). Reloading it reproduces the
/// scenario exactly.
std::string serialize_scenario(const Scenario& s);

/// The three built-in layouts. CU coordinates are approximate.
Scenario builtin_case(int id);
/// JSON text of a built-in case (identical to cases/case<id>.json).
std::string builtin_case_document(int id);

/// Copy of `s` with every array resized to `n` elements.
Scenario with_elements(const Scenario& s, int n);
/// Copy with all CU thresholds set to `sinr_db` (dB).
Scenario with_sinr_db(const Scenario& s, double sinr_db);
/// Copy with all ER thresholds set to `omega_dbm` (dBm).
Scenario with_harvest_dbm(const Scenario& s, double omega_dbm);
/// Copy with every ER region replaced by a disc of the given area (0 = point).
Scenario with_uncertainty_area(const Scenario& s, double area_m2);
Scenario with_power_budget_dbm(const Scenario& s, double p_dbm);
Scenario with_cu_type(const Scenario& s, CuType t);

/// FNV-1a hash of the serialized scenario.
std::uint64_t scenario_hash(const Scenario& s);

}  // namespace iscap
