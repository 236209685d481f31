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

#include "iscap/scenario.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "iscap/error.hpp"

namespace iscap {

using nlohmann::json;

SystemParams SystemParams::defaults() {
  SystemParams p;
  p.noise_comm = dbm_to_watt(-50.0);
  p.noise_sense = dbm_to_watt(-97.0);
  p.power_budget = dbm_to_watt(27.0);
  return p;
}

void SystemParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(name, "must be positive and finite");
  };
  positive(carrier_frequency, "params.carrier_frequency_hz");
  positive(rcs_magnitude, "params.rcs_magnitude");
  positive(eh_efficiency, "params.eh_efficiency");
  positive(noise_comm, "params.noise_comm");
  positive(noise_sense, "params.noise_sense");
  positive(power_budget, "params.power_budget");
  positive(false_alarm, "params.false_alarm");
  if (eh_efficiency > 1.0) throw ValidationError("params.eh_efficiency", "must not exceed 1");
  if (false_alarm >= 1.0) throw ValidationError("params.false_alarm", "must be below 1");
}

const char* to_string(CuType t) {
  switch (t) {
    case CuType::TypeI: return "I";
    case CuType::TypeII: return "II";
    case CuType::TypeIII: return "III";
  }
  return "?";
}

CuType parse_cu_type(std::string_view s) {
  if (s.starts_with("Type")) s.remove_prefix(4);
  if (s.starts_with("type")) s.remove_prefix(4);
  if (s.starts_with("-")) s.remove_prefix(1);
  if (s == "I" || s == "1") return CuType::TypeI;
  if (s == "II" || s == "2") return CuType::TypeII;
  if (s == "III" || s == "3") return CuType::TypeIII;
  throw ValidationError("cu_type", "unknown CU type '" + std::string(s) + "'");
}

void Scenario::validate() const {
  params.validate();
  const std::size_t k = bs.size();
  if (k == 0) throw ValidationError("base_stations", "at least one base station is required");
  if (cus.size() != k)
    throw ValidationError("cus", "expected " + std::to_string(k) + " CUs (one per BS), got " +
                                     std::to_string(cus.size()));
  if (ers.size() != k)
    throw ValidationError("ers", "expected " + std::to_string(k) + " ERs (one per BS), got " +
                                     std::to_string(ers.size()));
  for (std::size_t i = 0; i < k; ++i) {
    const std::string tag = "base_stations[" + std::to_string(i) + "]";
    try {
      bs[i].validate();
    } catch (const ValidationError& e) {
      throw ValidationError(tag + "." + e.field(), "invalid value");
    }
    if (bs[i].elements != bs.front().elements)
      throw ValidationError(tag + ".elements", "all arrays must have the same element count");
    if (std::abs(bs[i].wavelength - params.wavelength()) > 1e-12 * params.wavelength())
      throw ValidationError(tag + ".wavelength", "must match the carrier frequency");
  }
  for (std::size_t i = 0; i < k; ++i) {
    const std::string tag = "cus[" + std::to_string(i) + "]";
    if (!(cus[i].sinr_threshold > 0.0) || !std::isfinite(cus[i].sinr_threshold))
      throw ValidationError(tag + ".sinr_threshold", "must be positive");
    if (!std::isfinite(cus[i].position.x) || !std::isfinite(cus[i].position.y))
      throw ValidationError(tag + ".position", "coordinates must be finite");
  }
  for (std::size_t i = 0; i < k; ++i) {
    const std::string tag = "ers[" + std::to_string(i) + "]";
    if (!(ers[i].harvest_threshold > 0.0) || !std::isfinite(ers[i].harvest_threshold))
      throw ValidationError(tag + ".harvest_threshold", "must be positive");
    try {
      ers[i].region.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(tag + "." + e.field(), "invalid value");
    }
  }
  if (sensing.points.empty()) throw ValidationError("sensing.points", "at least one sample point is required");
  if (!(sensing.side > 0.0)) throw ValidationError("sensing.side_m", "must be positive");
  const double half = 0.5 * sensing.side * (1.0 + 1e-12);
  for (std::size_t m = 0; m < sensing.points.size(); ++m) {
    const auto& p = sensing.points[m];
    if (std::abs(p.x - sensing.center.x) > half || std::abs(p.y - sensing.center.y) > half)
      throw ValidationError("sensing.points[" + std::to_string(m) + "]", "lies outside the sensing square");
  }
}

std::vector<Point2D> discretize_sensing_area(Point2D center, double side, int m) {
  if (!(side > 0.0)) throw ValidationError("sensing.side_m", "must be positive");
  if (m == 1) return {center};
  if (m == 5) {
    const double o = side / 4.0;
    return {center,
            {center.x - o, center.y - o},
            {center.x + o, center.y - o},
            {center.x - o, center.y + o},
            {center.x + o, center.y + o}};
  }
  throw ValidationError("sensing.points", "only M = 1 or M = 5 are built in; use explicit_points");
}

namespace {

constexpr std::array<const char*, 3> kCaseDocuments = {
    R"json({
  "schema_version": 1,
  "label": "case 1: CUs far from the sensing area (CU positions approximate, figure-derived)",
  "params": {"carrier_frequency_hz": 2.4e9, "rcs_magnitude": 1.0, "eh_efficiency": 0.7,
             "noise_comm_dbm": -50, "noise_sense_dbm": -97, "power_budget_dbm": 27,
             "false_alarm": 1e-4},
  "array": {"elements": 64, "spacing_m": 0.0625, "angle_convention": "axis"},
  "sinr_threshold_db": 10,
  "harvest_threshold_dbm": -30,
  "uncertainty_area_m2": 0,
  "cu_type": "I",
  "base_stations": [
    {"position": [0, 0], "orientation_deg": 120},
    {"position": [45, 77.94228634059948], "orientation_deg": 0},
    {"position": [90, 0], "orientation_deg": 60}
  ],
  "cus": [
    {"position": [14.0, 6.0]},
    {"position": [45.0, 62.0]},
    {"position": [76.0, 6.0]}
  ],
  "ers": [
    {"center": [3.75, 37.5]},
    {"center": [22.5, 60.0]},
    {"center": [85.5, 37.5]}
  ],
  "sensing": {"center": [45, 25], "side_m": 3, "points": 5}
}
)json",
    R"json({
  "schema_version": 1,
  "label": "case 2: CUs at moderate distance from the sensing area (CU positions approximate, figure-derived)",
  "params": {"carrier_frequency_hz": 2.4e9, "rcs_magnitude": 1.0, "eh_efficiency": 0.7,
             "noise_comm_dbm": -50, "noise_sense_dbm": -97, "power_budget_dbm": 27,
             "false_alarm": 1e-4},
  "array": {"elements": 64, "spacing_m": 0.0625, "angle_convention": "axis"},
  "sinr_threshold_db": 10,
  "harvest_threshold_dbm": -30,
  "uncertainty_area_m2": 0,
  "cu_type": "I",
  "base_stations": [
    {"position": [0, 0], "orientation_deg": 120},
    {"position": [45, 77.94228634059948], "orientation_deg": 0},
    {"position": [90, 0], "orientation_deg": 60}
  ],
  "cus": [
    {"position": [27.0, 14.0]},
    {"position": [45.0, 46.0]},
    {"position": [63.0, 14.0]}
  ],
  "ers": [
    {"center": [3.75, 37.5]},
    {"center": [22.5, 60.0]},
    {"center": [85.5, 37.5]}
  ],
  "sensing": {"center": [45, 25], "side_m": 3, "points": 5}
}
)json",
    R"json({
  "schema_version": 1,
  "label": "case 3: CUs close to the sensing area (CU positions approximate, figure-derived)",
  "params": {"carrier_frequency_hz": 2.4e9, "rcs_magnitude": 1.0, "eh_efficiency": 0.7,
             "noise_comm_dbm": -50, "noise_sense_dbm": -97, "power_budget_dbm": 27,
             "false_alarm": 1e-4},
  "array": {"elements": 64, "spacing_m": 0.0625, "angle_convention": "axis"},
  "sinr_threshold_db": 10,
  "harvest_threshold_dbm": -30,
  "uncertainty_area_m2": 0,
  "cu_type": "I",
  "base_stations": [
    {"position": [0, 0], "orientation_deg": 120},
    {"position": [45, 77.94228634059948], "orientation_deg": 0},
    {"position": [90, 0], "orientation_deg": 60}
  ],
  "cus": [
    {"position": [36.0, 18.0]},
    {"position": [52.0, 30.0]},
    {"position": [55.0, 19.0]}
  ],
  "ers": [
    {"center": [3.75, 37.5]},
    {"center": [22.5, 60.0]},
    {"center": [85.5, 37.5]}
  ],
  "sensing": {"center": [45, 25], "side_m": 3, "points": 5}
}
)json"};

double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double number_at(const json& j, const std::string& field) {
  if (!j.is_number()) throw ValidationError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(field, "must be finite");
  return v;
}

Point2D point_at(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) throw ValidationError(field, "expected [x, y] in meters");
  return {number_at(j[0], field + "[0]"), number_at(j[1], field + "[1]")};
}

// Reads a power-like field given either as "<base>_dbm" or "<base>_w".
double power_field(const json& j, const std::string& base, const std::string& tag, double fallback) {
  const json* dbm = find(j, (base + "_dbm").c_str());
  const json* w = find(j, (base + "_w").c_str());
  if (dbm && w) throw ValidationError(tag + base, "give either _dbm or _w, not both");
  if (dbm) return dbm_to_watt(number_at(*dbm, tag + base + "_dbm"));
  if (w) return number_at(*w, tag + base + "_w");
  return fallback;
}

double ratio_field(const json& j, const std::string& base, const std::string& tag, double fallback) {
  const json* db = find(j, (base + "_db").c_str());
  const json* r = find(j, (base + "_ratio").c_str());
  if (db && r) throw ValidationError(tag + base, "give either _db or _ratio, not both");
  if (db) return db_to_ratio(number_at(*db, tag + base + "_db"));
  if (r) return number_at(*r, tag + base + "_ratio");
  return fallback;
}

double number_or(const json& j, const char* key, const std::string& tag, double fallback) {
  const json* v = find(j, key);
  return v ? number_at(*v, tag + key) : fallback;
}

const json& array_at(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v) throw ValidationError(key, "missing required array");
  if (!v->is_array()) throw ValidationError(key, "expected an array");
  return *v;
}

Scenario parse_document(const json& doc) {
  if (!doc.is_object()) throw ValidationError("document", "expected a JSON object");
  if (const json* v = find(doc, "schema_version")) {
    if (!v->is_number_integer() || v->get<int>() != kSchemaVersion)
      throw ValidationError("schema_version", "unsupported schema version");
  }

  Scenario s;
  if (const json* v = find(doc, "label"); v && v->is_string()) s.label = v->get<std::string>();

  SystemParams p = SystemParams::defaults();
  if (const json* pj = find(doc, "params")) {
    if (!pj->is_object()) throw ValidationError("params", "expected an object");
    const std::string tag = "params.";
    p.carrier_frequency = number_or(*pj, "carrier_frequency_hz", tag, p.carrier_frequency);
    p.rcs_magnitude = number_or(*pj, "rcs_magnitude", tag, p.rcs_magnitude);
    p.eh_efficiency = number_or(*pj, "eh_efficiency", tag, p.eh_efficiency);
    p.noise_comm = power_field(*pj, "noise_comm", tag, p.noise_comm);
    p.noise_sense = power_field(*pj, "noise_sense", tag, p.noise_sense);
    p.power_budget = power_field(*pj, "power_budget", tag, p.power_budget);
    p.false_alarm = number_or(*pj, "false_alarm", tag, p.false_alarm);
  }
  s.params = p;
  p.validate();

  int elements = 64;
  double spacing = 0.0625;
  bool axis_convention = false;
  if (const json* aj = find(doc, "array")) {
    if (const json* v = find(*aj, "elements")) {
      if (!v->is_number_integer()) throw ValidationError("array.elements", "expected an integer");
      elements = v->get<int>();
    }
    spacing = number_or(*aj, "spacing_m", "array.", spacing);
    if (const json* v = find(*aj, "angle_convention")) {
      const std::string c = v->is_string() ? v->get<std::string>() : "";
      if (c == "axis") axis_convention = true;
      else if (c != "normal") throw ValidationError("array.angle_convention", "expected \"normal\" or \"axis\"");
    }
  }

  const double default_sinr = ratio_field(doc, "sinr_threshold", "", db_to_ratio(10.0));
  const double default_omega = power_field(doc, "harvest_threshold", "", dbm_to_watt(-30.0));
  const double default_area = number_or(doc, "uncertainty_area_m2", "", 0.0);
  CuType default_type = CuType::TypeI;
  if (const json* v = find(doc, "cu_type")) {
    if (!v->is_string()) throw ValidationError("cu_type", "expected a string");
    default_type = parse_cu_type(v->get<std::string>());
  }

  const json& bsj = array_at(doc, "base_stations");
  for (std::size_t i = 0; i < bsj.size(); ++i) {
    const std::string tag = "base_stations[" + std::to_string(i) + "]";
    const json& b = bsj[i];
    const json* pos = find(b, "position");
    if (!pos) throw ValidationError(tag + ".position", "missing");
    ArrayGeometry g;
    g.center = point_at(*pos, tag + ".position");
    g.elements = elements;
    g.spacing = spacing;
    g.wavelength = p.wavelength();
    const json* deg = find(b, "orientation_deg");
    const json* rad = find(b, "boresight_rad");
    if (deg && rad) throw ValidationError(tag, "give either orientation_deg or boresight_rad");
    if (rad) {
      g.boresight = number_at(*rad, tag + ".boresight_rad");
    } else if (deg) {
      const double angle = deg_to_rad(number_at(*deg, tag + ".orientation_deg"));
      // "axis": the angle gives the element line; the normal is 90 degrees clockwise of it
      g.boresight = axis_convention ? angle - std::numbers::pi / 2.0 : angle;
    } else {
      throw ValidationError(tag + ".orientation_deg", "missing");
    }
    s.bs.push_back(g);
  }

  const json& cuj = array_at(doc, "cus");
  for (std::size_t i = 0; i < cuj.size(); ++i) {
    const std::string tag = "cus[" + std::to_string(i) + "].";
    const json& c = cuj[i];
    CuSpec cu;
    const json* pos = find(c, "position");
    if (!pos) throw ValidationError(tag + "position", "missing");
    cu.position = point_at(*pos, tag + "position");
    cu.sinr_threshold = ratio_field(c, "sinr_threshold", tag, default_sinr);
    cu.type = default_type;
    if (const json* t = find(c, "type")) {
      if (!t->is_string()) throw ValidationError(tag + "type", "expected a string");
      cu.type = parse_cu_type(t->get<std::string>());
    }
    s.cus.push_back(cu);
  }

  const json& erj = array_at(doc, "ers");
  for (std::size_t i = 0; i < erj.size(); ++i) {
    const std::string tag = "ers[" + std::to_string(i) + "].";
    const json& e = erj[i];
    ErSpec er;
    const json* c = find(e, "center");
    if (!c) throw ValidationError(tag + "center", "missing");
    const Point2D center = point_at(*c, tag + "center");
    er.harvest_threshold = power_field(e, "harvest_threshold", tag, default_omega);
    std::string kind = "auto";
    if (const json* k = find(e, "region")) {
      if (!k->is_string()) throw ValidationError(tag + "region", "expected a string");
      kind = k->get<std::string>();
    }
    if (kind == "point") {
      er.region = UncertaintyRegion::point(center);
    } else if (kind == "gaussian") {
      const json* cov = find(e, "covariance_m2");
      if (!cov || !cov->is_array() || cov->size() != 2)
        throw ValidationError(tag + "covariance_m2", "expected [[sxx, sxy], [syx, syy]]");
      Eigen::Matrix2d m;
      for (int a = 0; a < 2; ++a) {
        const json& row = (*cov)[static_cast<std::size_t>(a)];
        if (!row.is_array() || row.size() != 2)
          throw ValidationError(tag + "covariance_m2", "expected a 2x2 nested array");
        for (int b = 0; b < 2; ++b)
          m(a, b) = number_at(row[static_cast<std::size_t>(b)], tag + "covariance_m2");
      }
      er.region = UncertaintyRegion{UncertaintyRegion::Kind::Gaussian, center, 0.0, m};
    } else if (kind == "disc" || kind == "auto") {
      const json* r = find(e, "radius_m");
      const json* a = find(e, "area_m2");
      if (r && a) throw ValidationError(tag + "radius_m", "give either radius_m or area_m2");
      if (r) {
        er.region = UncertaintyRegion{UncertaintyRegion::Kind::UniformDisc, center,
                                      number_at(*r, tag + "radius_m"), Eigen::Matrix2d::Zero()};
      } else {
        const double area = a ? number_at(*a, tag + "area_m2") : default_area;
        if (area < 0.0) throw ValidationError(tag + "area_m2", "must be nonnegative");
        er.region = UncertaintyRegion::disc_with_area(center, area);
        if (kind == "disc" && area == 0.0)
          er.region = UncertaintyRegion{UncertaintyRegion::Kind::UniformDisc, center, 0.0,
                                        Eigen::Matrix2d::Zero()};
      }
    } else {
      throw ValidationError(tag + "region", "expected \"point\", \"disc\" or \"gaussian\"");
    }
    s.ers.push_back(er);
  }

  const json* sj = find(doc, "sensing");
  if (!sj || !sj->is_object()) throw ValidationError("sensing", "missing sensing area");
  const json* sc = find(*sj, "center");
  if (!sc) throw ValidationError("sensing.center", "missing");
  s.sensing.center = point_at(*sc, "sensing.center");
  s.sensing.side = number_or(*sj, "side_m", "sensing.", 3.0);
  const json* explicit_pts = find(*sj, "explicit_points");
  const json* count = find(*sj, "points");
  if (explicit_pts && count) throw ValidationError("sensing.points", "give either points or explicit_points");
  if (explicit_pts) {
    if (!explicit_pts->is_array()) throw ValidationError("sensing.explicit_points", "expected an array");
    for (std::size_t m = 0; m < explicit_pts->size(); ++m)
      s.sensing.points.push_back(
          point_at((*explicit_pts)[m], "sensing.explicit_points[" + std::to_string(m) + "]"));
  } else {
    int m = 5;
    if (count) {
      if (!count->is_number_integer()) throw ValidationError("sensing.points", "expected an integer");
      m = count->get<int>();
    }
    s.sensing.points = discretize_sensing_area(s.sensing.center, s.sensing.side, m);
  }

  s.validate();
  return s;
}

json point_json(const Point2D& p) { return json::array({p.x, p.y}); }

}  // namespace

std::string builtin_case_document(int id) {
  if (id < 1 || id > 3) throw ValidationError("case", "unknown case id " + std::to_string(id));
  return kCaseDocuments[static_cast<std::size_t>(id - 1)];
}

Scenario builtin_case(int id) { return load_scenario(builtin_case_document(id)); }

Scenario load_scenario(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ValidationError("document", std::string("malformed JSON: ") + e.what());
  }
  if (doc.is_object()) {
    if (const json* c = find(doc, "case")) {
      if (!c->is_number_integer()) throw ValidationError("case", "expected 1, 2 or 3");
      json base = json::parse(builtin_case_document(c->get<int>()));
      json patch = doc;
      patch.erase("case");
      base.merge_patch(patch);
      return parse_document(base);
    }
  }
  return parse_document(doc);
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["label"] = s.label;
  doc["params"] = {{"carrier_frequency_hz", s.params.carrier_frequency},
                   {"rcs_magnitude", s.params.rcs_magnitude},
                   {"eh_efficiency", s.params.eh_efficiency},
                   {"noise_comm_w", s.params.noise_comm},
                   {"noise_sense_w", s.params.noise_sense},
                   {"power_budget_w", s.params.power_budget},
                   {"false_alarm", s.params.false_alarm}};
  doc["array"] = {{"elements", s.elements()},
                  {"spacing_m", s.bs.empty() ? 0.0 : s.bs.front().spacing},
                  {"angle_convention", "normal"}};
  json bsj = json::array();
  for (const auto& g : s.bs) bsj.push_back({{"position", point_json(g.center)}, {"boresight_rad", g.boresight}});
  doc["base_stations"] = bsj;
  json cuj = json::array();
  for (const auto& c : s.cus)
    cuj.push_back({{"position", point_json(c.position)},
                   {"sinr_threshold_ratio", c.sinr_threshold},
                   {"type", to_string(c.type)}});
  doc["cus"] = cuj;
  json erj = json::array();
  for (const auto& e : s.ers) {
    json item = {{"center", point_json(e.region.center)},
                 {"region", to_string(e.region.kind)},
                 {"harvest_threshold_w", e.harvest_threshold}};
    if (e.region.kind == UncertaintyRegion::Kind::UniformDisc) item["radius_m"] = e.region.radius;
    if (e.region.kind == UncertaintyRegion::Kind::Gaussian) {
      const auto& m = e.region.covariance;
      item["covariance_m2"] = json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
    }
    erj.push_back(item);
  }
  doc["ers"] = erj;
  json pts = json::array();
  for (const auto& p : s.sensing.points) pts.push_back(point_json(p));
  doc["sensing"] = {{"center", point_json(s.sensing.center)}, {"side_m", s.sensing.side}, {"explicit_points", pts}};
  return doc.dump(2);
}

Scenario with_elements(const Scenario& s, int n) {
  Scenario out = s;
  for (auto& g : out.bs) g.elements = n;
  out.validate();
  return out;
}

Scenario with_sinr_db(const Scenario& s, double sinr_db) {
  Scenario out = s;
  for (auto& c : out.cus) c.sinr_threshold = db_to_ratio(sinr_db);
  return out;
}

Scenario with_harvest_dbm(const Scenario& s, double omega_dbm) {
  Scenario out = s;
  for (auto& e : out.ers) e.harvest_threshold = dbm_to_watt(omega_dbm);
  return out;
}

Scenario with_uncertainty_area(const Scenario& s, double area_m2) {
  Scenario out = s;
  for (auto& e : out.ers) e.region = UncertaintyRegion::disc_with_area(e.region.center, area_m2);
  return out;
}

Scenario with_power_budget_dbm(const Scenario& s, double p_dbm) {
  Scenario out = s;
  out.params.power_budget = dbm_to_watt(p_dbm);
  return out;
}

Scenario with_cu_type(const Scenario& s, CuType t) {
  Scenario out = s;
  for (auto& c : out.cus) c.type = t;
  return out;
}

std::uint64_t scenario_hash(const Scenario& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : serialize_scenario(s)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace iscap
