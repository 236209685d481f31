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

#include "iscap/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "iscap/error.hpp"
#include "iscap/geometry.hpp"
#include "iscap/metrics.hpp"
#include "iscap/mrt.hpp"
#include "iscap/parallel.hpp"

namespace iscap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::SDR: return "sdr";
    case Method::MRT: return "mrt";
    case Method::MRTAsymptotic: return "mrt-asymptotic";
    case Method::NonCoordinated: return "noncoordinated";
    case Method::WorstCaseRobust: return "worstcase-robust";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  const std::string v = lower(s);
  if (v == "sdr") return Method::SDR;
  if (v == "mrt") return Method::MRT;
  if (v == "mrt-asymptotic" || v == "mrt-asym") return Method::MRTAsymptotic;
  if (v == "noncoordinated" || v == "non-coordinated" || v == "nc") return Method::NonCoordinated;
  if (v == "worstcase-robust" || v == "worstcase" || v == "robust") return Method::WorstCaseRobust;
  throw ValidationError("method", "unknown method '" + std::string(s) + "'");
}

const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::SinrDb: return "sinr_threshold_db";
    case SweepParameter::HarvestDbm: return "harvest_threshold_dbm";
    case SweepParameter::UncertaintyArea: return "uncertainty_area_m2";
    case SweepParameter::PowerBudgetDbm: return "power_budget_dbm";
    case SweepParameter::FalseAlarm: return "false_alarm";
  }
  return "?";
}

SweepParameter parse_sweep_parameter(std::string_view s) {
  const std::string v = lower(s);
  for (auto p : {SweepParameter::SinrDb, SweepParameter::HarvestDbm, SweepParameter::UncertaintyArea,
                 SweepParameter::PowerBudgetDbm, SweepParameter::FalseAlarm})
    if (v == to_string(p)) return p;
  if (v == "sinr" || v == "gamma") return SweepParameter::SinrDb;
  if (v == "harvest" || v == "omega") return SweepParameter::HarvestDbm;
  if (v == "area") return SweepParameter::UncertaintyArea;
  if (v == "power" || v == "pmax") return SweepParameter::PowerBudgetDbm;
  if (v == "pfa") return SweepParameter::FalseAlarm;
  throw ValidationError("parameter", "unknown sweep parameter '" + std::string(s) + "'");
}

Scenario apply_parameter(const Scenario& s, SweepParameter p, double value) {
  switch (p) {
    case SweepParameter::SinrDb: return with_sinr_db(s, value);
    case SweepParameter::HarvestDbm: return with_harvest_dbm(s, value);
    case SweepParameter::UncertaintyArea: return with_uncertainty_area(s, value);
    case SweepParameter::PowerBudgetDbm: return with_power_budget_dbm(s, value);
    case SweepParameter::FalseAlarm: {
      if (!(value > 0.0 && value < 1.0)) throw ValidationError("false_alarm", "must lie in (0, 1)");
      Scenario out = s;
      out.params.false_alarm = value;
      return out;
    }
  }
  throw ContractViolation("apply_parameter: bad parameter");
}

void SweepSpec::validate() const {
  if (grid.empty()) throw ValidationError("grid", "must not be empty");
  if (methods.empty()) throw ValidationError("methods", "must not be empty");
  if (cu_types.empty()) throw ValidationError("cu_types", "must not be empty");
  if (!(tol > 0.0)) throw ValidationError("tol", "must be positive");
  for (double v : grid)
    if (!std::isfinite(v)) throw ValidationError("grid", "values must be finite");
}

int SweepTable::count(SolveStatus st) const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(),
                                        [st](const SweepRow& r) { return r.status == st; }));
}

SweepRow solve_cell(const Scenario& s, const CovarianceSet& gset, Method method, double tol,
                    BeamformingSolution* solution) {
  SweepRow row;
  row.method = method;
  const auto t0 = std::chrono::steady_clock::now();
  BeamformingSolution sol;
  try {
    switch (method) {
      case Method::SDR: sol = solve_coordinated(s, gset, tol).solution; break;
      case Method::MRT: sol = solve_mrt(s, gset, std::min(tol, 1e-9)).solution; break;
      case Method::MRTAsymptotic: sol = solve_mrt_asymptotic(s, gset).solution; break;
      case Method::NonCoordinated: sol = solve_noncoordinated(s, gset, tol); break;
      case Method::WorstCaseRobust: sol = solve_worstcase_robust(s, gset, 9, tol).solution; break;
    }
  } catch (const std::exception& e) {
    row.status = SolveStatus::NumericalFailure;
    row.message = e.what();
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (sol.report) {
    row.status = sol.report->status;
    row.message = sol.report->message;
  }
  if (solution) *solution = sol;
  if (row.status != SolveStatus::Optimal) {
    row.theta = kNaN;
    row.detection = kNaN;
    row.max_violation = kNaN;
    return row;
  }
  const WorstCaseDetection wc = worst_case_detection(sol, s);
  row.theta = wc.echo;
  row.detection = wc.probability;
  row.worst_point = wc.index;
  const FeasibilityCheck chk = check_unrelaxed(sol, s, gset, wc.echo);
  row.max_violation = chk.max_violation;
  row.slacks = chk.rows;
  for (auto& a : row.slacks) a.slack /= a.scale;
  return row;
}

SweepTable run_sweep(const SweepSpec& spec, const Scenario& base) {
  spec.validate();
  Scenario fixed = base;
  for (const auto& [p, v] : spec.fixed) fixed = apply_parameter(fixed, p, v);
  fixed.validate();

  struct Cell {
    int grid_index;
    Method method;
    CuType type;
  };
  std::vector<Cell> cells;
  for (int g = 0; g < static_cast<int>(spec.grid.size()); ++g)
    for (Method m : spec.methods)
      for (CuType t : spec.cu_types) cells.push_back({g, m, t});

  // Covariances depend on the swept value only through the ER regions.
  std::vector<Scenario> scen(spec.grid.size());
  std::vector<CovarianceSet> gsets(spec.grid.size());
  CovarianceCache cache;
  parallel_for(
      spec.grid.size(),
      [&](std::size_t g) {
        scen[g] = apply_parameter(fixed, spec.parameter, spec.grid[g]);
        scen[g].validate();
        gsets[g] = compute_covariance_set(scen[g], kDefaultQuadratureTol, &cache);
      },
      spec.workers);

  SweepTable out;
  out.parameter = spec.parameter;
  out.rows.resize(cells.size());
  parallel_for(
      cells.size(),
      [&](std::size_t i) {
        const Cell& c = cells[i];
        const auto g = static_cast<std::size_t>(c.grid_index);
        SweepRow row;
        try {
          row = solve_cell(with_cu_type(scen[g], c.type), gsets[g], c.method, spec.tol);
        } catch (const std::exception& e) {
          row.status = SolveStatus::NumericalFailure;
          row.message = e.what();
          row.theta = row.detection = row.max_violation = kNaN;
        }
        row.grid_index = c.grid_index;
        row.value = spec.grid[g];
        row.method = c.method;
        row.cu_type = c.type;
        out.rows[i] = std::move(row);
      },
      spec.workers);
  return out;
}

// ---------------------------------------------------------------- power maps

void PowerMapSpec::validate() const {
  if (nx < 1 || ny < 1) throw ValidationError("resolution", "must be positive");
  if (!(upper.x > lower.x && upper.y > lower.y))
    throw ValidationError("bounding_box", "upper corner must exceed lower corner");
}

Point2D PowerMapSpec::cell_center(int ix, int iy) const {
  const double dx = (upper.x - lower.x) / nx;
  const double dy = (upper.y - lower.y) / ny;
  return {lower.x + (ix + 0.5) * dx, lower.y + (iy + 0.5) * dy};
}

bool PowerMap::invalid(std::size_t b, int ix, int iy) const { return std::isnan(values[b](iy, ix)); }

PowerMap power_map(const BeamformingSolution& sol, const Scenario& s, const PowerMapSpec& spec) {
  spec.validate();
  PowerMap out;
  out.spec = spec;
  if (spec.bs.empty()) {
    for (int k = 0; k < s.num_bs(); ++k) out.bs.push_back(k);
  } else {
    out.bs = spec.bs;
  }
  for (int k : out.bs)
    if (k < 0 || k >= s.num_bs()) throw ValidationError("bs", "index out of range");
  if (sol.num_bs() != s.num_bs()) throw ContractViolation("power_map: solution size differs from scenario");

  const double dx = (spec.upper.x - spec.lower.x) / spec.nx;
  const double dy = (spec.upper.y - spec.lower.y) / spec.ny;
  for (int k : out.bs) {
    const ArrayGeometry& g = s.bs[static_cast<std::size_t>(k)];
    const std::vector<Point2D> elems = element_positions(g);
    const auto& w = sol.info_beams[static_cast<std::size_t>(k)];
    const auto& r = sol.dual_covariances[static_cast<std::size_t>(k)];
    Eigen::MatrixXd v(spec.ny, spec.nx);
    parallel_for(static_cast<std::size_t>(spec.ny), [&](std::size_t iyu) {
      const int iy = static_cast<int>(iyu);
      for (int ix = 0; ix < spec.nx; ++ix) {
        const Point2D p = spec.cell_center(ix, iy);
        const double x0 = spec.lower.x + ix * dx, y0 = spec.lower.y + iy * dy;
        const bool hit = std::any_of(elems.begin(), elems.end(), [&](const Point2D& e) {
          return e.x >= x0 && e.x < x0 + dx && e.y >= y0 && e.y < y0 + dy;
        });
        if (hit) {
          v(iy, ix) = kNaN;
          continue;
        }
        const ComplexVector h = channel_vector(g, elems, p);
        const double beam = std::norm(h.dot(w));
        const double dual = std::real(h.dot(r * h));
        v(iy, ix) = beam + dual;
      }
    });
    out.values.push_back(std::move(v));
  }
  return out;
}

// ---------------------------------------------------------------- CSV

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& s) {
  if (s == "nan") return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  // Subnormals report result_out_of_range but still carry the rounded value.
  if (ec == std::errc::invalid_argument || (ec == std::errc::result_out_of_range && std::abs(v) > 1.0))
    throw ValidationError("csv", "not a number: '" + s + "'");
  if (ptr != end) throw ValidationError("csv", "trailing characters in '" + s + "'");
  return v;
}

CsvTable sweep_csv(const SweepTable& t) {
  CsvTable out;
  std::vector<std::string> labels;
  for (const auto& r : t.rows)
    for (const auto& a : r.slacks)
      if (std::find(labels.begin(), labels.end(), a.label) == labels.end()) labels.push_back(a.label);
  out.header = {"grid_index",
                std::string(to_string(t.parameter)),
                "method",
                "cu_type",
                "status",
                "theta_w",
                "detection_probability",
                "worst_sensing_point",
                "max_violation_rel"};
  for (const auto& l : labels) out.header.push_back("slack_rel:" + l);
  out.header.push_back("message");
  for (const auto& r : t.rows) {
    std::vector<std::string> row = {std::to_string(r.grid_index), format_number(r.value),
                                    to_string(r.method), to_string(r.cu_type), to_string(r.status),
                                    format_number(r.theta), format_number(r.detection),
                                    std::to_string(r.worst_point), format_number(r.max_violation)};
    for (const auto& l : labels) {
      auto it = std::find_if(r.slacks.begin(), r.slacks.end(),
                             [&](const ConstraintActivity& a) { return a.label == l; });
      row.push_back(format_number(it == r.slacks.end() ? kNaN : it->slack));
    }
    row.push_back(r.message);
    out.rows.push_back(std::move(row));
  }
  return out;
}

CsvTable sweep_timing_csv(const SweepTable& t) {
  CsvTable out;
  out.header = {"grid_index", "method", "cu_type", "seconds"};
  for (const auto& r : t.rows)
    out.rows.push_back({std::to_string(r.grid_index), to_string(r.method), to_string(r.cu_type),
                        format_number(r.seconds)});
  return out;
}

CsvTable power_map_csv(const PowerMap& m) {
  CsvTable out;
  out.header = {"bs", "ix", "iy", "x_m", "y_m", "power_w", "power_dbm", "valid"};
  for (std::size_t b = 0; b < m.bs.size(); ++b)
    for (int iy = 0; iy < m.spec.ny; ++iy)
      for (int ix = 0; ix < m.spec.nx; ++ix) {
        const Point2D p = m.spec.cell_center(ix, iy);
        const double v = m.values[b](iy, ix);
        const bool ok = !std::isnan(v);
        out.rows.push_back({std::to_string(m.bs[b]), std::to_string(ix), std::to_string(iy),
                            format_number(p.x), format_number(p.y), format_number(v),
                            format_number(ok && v > 0 ? watt_to_dbm(v) : kNaN), ok ? "1" : "0"});
      }
  return out;
}

namespace {

std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\n\r") == std::string::npos) return f;
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_line(const std::vector<std::string>& fields, std::ostream& os) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_field(fields[i]);
  }
  os << '\n';
}

// RFC-4180 style record reader; returns false at end of input.
bool read_record(std::istream& is, std::vector<std::string>& out) {
  out.clear();
  if (is.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  char c;
  while (is.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          field += '"';
          is.get();
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return true;
}

}  // namespace

void write_csv(const CsvTable& t, std::ostream& os) {
  write_line(t.header, os);
  for (const auto& r : t.rows) {
    if (r.size() != t.header.size()) throw ContractViolation("csv: row width differs from header");
    write_line(r, os);
  }
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  if (!read_record(is, t.header)) return t;
  std::vector<std::string> rec;
  while (read_record(is, rec)) {
    if (rec.size() != t.header.size()) throw ValidationError("csv", "row width differs from header");
    t.rows.push_back(rec);
  }
  return t;
}

void emit_csv(const CsvTable& t, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(path, "cannot open for writing");
  write_csv(t, f);
  if (!f) throw IoError(path, "write failed");
}

CsvTable load_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(path, "cannot open for reading");
  return read_csv(f);
}

// ---------------------------------------------------------------- heat maps

namespace {

constexpr double kFloorDb = -50.0;

// Five-stop perceptual ramp, dark (low) to bright (high).
std::string ramp(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops = {{{68, 1, 84},
                                                                   {59, 82, 139},
                                                                   {33, 145, 140},
                                                                   {94, 201, 98},
                                                                   {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double f = t - i;
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c)
    rgb[c] = static_cast<int>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

}  // namespace

std::string heatmap_svg(const PowerMap& m, std::size_t b, const Scenario& s) {
  if (b >= m.values.size()) throw ContractViolation("heatmap: map index out of range");
  const auto& spec = m.spec;
  const auto& v = m.values[b];
  double vmax = 0.0;
  for (int iy = 0; iy < spec.ny; ++iy)
    for (int ix = 0; ix < spec.nx; ++ix)
      if (!std::isnan(v(iy, ix))) vmax = std::max(vmax, v(iy, ix));

  const double width = spec.upper.x - spec.lower.x;
  const double height = spec.upper.y - spec.lower.y;
  const double px = 600.0 / std::max(width, height);
  const double cw = width / spec.nx * px, ch = height / spec.ny * px;
  auto sx = [&](double x) { return (x - spec.lower.x) * px; };
  auto sy = [&](double y) { return (spec.upper.y - y) * px; };  // y up
  auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return std::string(buf);
  };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width * px + 90) << "\" height=\""
     << num(height * px) << "\" viewBox=\"0 0 " << num(width * px + 90) << ' ' << num(height * px)
     << "\">\n"
     << "<title>received power from BS " << m.bs[b] << ", dB relative to max</title>\n"
     << "<g id=\"cells\" shape-rendering=\"crispEdges\">\n";
  for (int iy = 0; iy < spec.ny; ++iy)
    for (int ix = 0; ix < spec.nx; ++ix) {
      const double x0 = spec.lower.x + ix * (width / spec.nx);
      const double y1 = spec.lower.y + (iy + 1) * (height / spec.ny);
      const double val = v(iy, ix);
      std::string fill = "#bdbdbd", cls = "cell invalid";
      if (!std::isnan(val)) {
        const double db = (vmax > 0.0 && val > 0.0) ? 10.0 * std::log10(val / vmax) : kFloorDb;
        fill = ramp(1.0 - std::max(db, kFloorDb) / kFloorDb);
        cls = "cell";
      }
      os << "<rect class=\"" << cls << "\" x=\"" << num(sx(x0)) << "\" y=\"" << num(sy(y1))
         << "\" width=\"" << num(cw) << "\" height=\"" << num(ch) << "\" fill=\"" << fill << "\"/>\n";
    }
  os << "</g>\n<g id=\"markers\" stroke=\"white\" stroke-width=\"1.5\">\n";
  for (std::size_t k = 0; k < s.bs.size(); ++k) {
    const Point2D c = s.bs[k].center;
    os << "<rect class=\"marker bs\" x=\"" << num(sx(c.x) - 5) << "\" y=\"" << num(sy(c.y) - 5)
       << "\" width=\"10\" height=\"10\" fill=\"black\"/>\n";
  }
  for (const auto& cu : s.cus)
    os << "<circle class=\"marker cu\" cx=\"" << num(sx(cu.position.x)) << "\" cy=\""
       << num(sy(cu.position.y)) << "\" r=\"5\" fill=\"red\"/>\n";
  for (const auto& er : s.ers) {
    const Point2D c = er.region.center;
    const double r = std::max(5.0, er.region.radius * px);
    os << "<circle class=\"marker er\" cx=\"" << num(sx(c.x)) << "\" cy=\"" << num(sy(c.y))
       << "\" r=\"" << num(r) << "\" fill=\"none\"/>\n";
  }
  for (const auto& p : s.sensing.points)
    os << "<path class=\"marker sense\" d=\"M" << num(sx(p.x) - 4) << ' ' << num(sy(p.y) - 4) << " L"
       << num(sx(p.x) + 4) << ' ' << num(sy(p.y) + 4) << " M" << num(sx(p.x) - 4) << ' '
       << num(sy(p.y) + 4) << " L" << num(sx(p.x) + 4) << ' ' << num(sy(p.y) - 4) << "\"/>\n";
  os << "</g>\n<g id=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
  const double lx = width * px + 20, lh = height * px - 40;
  for (int i = 0; i < 50; ++i)
    os << "<rect x=\"" << num(lx) << "\" y=\"" << num(20 + lh * i / 50.0) << "\" width=\"16\" height=\""
       << num(lh / 50.0 + 0.5) << "\" fill=\"" << ramp(1.0 - i / 49.0) << "\"/>\n";
  os << "<text x=\"" << num(lx + 20) << "\" y=\"28\">0 dB</text>\n"
     << "<text x=\"" << num(lx + 20) << "\" y=\"" << num(20 + lh) << "\">" << kFloorDb << " dB</text>\n"
     << "</g>\n</svg>\n";
  return os.str();
}

void emit_heatmap(const PowerMap& m, std::size_t b, const Scenario& s, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(path, "cannot open for writing");
  f << heatmap_svg(m, b, s);
  if (!f) throw IoError(path, "write failed");
}

// ---------------------------------------------------------------- SDPA

void write_sdpa(const conic::Problem& p, std::ostream& os, const std::string& comment) {
  p.validate();
  const int nb = static_cast<int>(p.psd_dims.size());
  const int lp_block = p.lp_dim > 0 ? nb + 1 : 0;
  std::istringstream lines(comment);
  for (std::string l; std::getline(lines, l);) os << "* " << l << '\n';
  os << "* SDPA sparse format. Embedded problem: minimize <C,X> s.t. <A_i,X> = b_i, X in the cone.\n"
     << "* Written as the SDPA dual: maximize <F0,Y> s.t. <F_i,Y> = c_i, Y psd,\n"
     << "* with F0 = -C, F_i = A_i, c_i = b_i; the SDPA optimum is -(embedded minimum).\n"
     << "* Blocks 1.." << nb << " are symmetric PSD blocks";
  if (lp_block) os << "; block " << lp_block << " is the nonnegative orthant (negative size)";
  os << ".\n";
  os << p.num_rows() << "\n" << (nb + (lp_block ? 1 : 0)) << "\n";
  for (int j = 0; j < nb; ++j) os << p.psd_dims[static_cast<std::size_t>(j)] << ' ';
  if (lp_block) os << -p.lp_dim;
  os << "\n";
  for (int i = 0; i < p.num_rows(); ++i) os << (i ? " " : "") << format_number(p.b(i));
  os << "\n";
  auto emit_matrix = [&](int matno, int blk, const Eigen::MatrixXd& a, double sign) {
    for (int r = 0; r < a.rows(); ++r)
      for (int c = r; c < a.cols(); ++c)
        if (a(r, c) != 0.0)
          os << matno << ' ' << blk << ' ' << r + 1 << ' ' << c + 1 << ' ' << format_number(sign * a(r, c))
             << '\n';
  };
  for (int j = 0; j < nb; ++j)
    if (p.c_psd[static_cast<std::size_t>(j)].size() != 0)
      emit_matrix(0, j + 1, p.c_psd[static_cast<std::size_t>(j)], -1.0);
  for (int k = 0; k < p.lp_dim; ++k)
    if (p.c_lp(k) != 0.0) os << "0 " << lp_block << ' ' << k + 1 << ' ' << k + 1 << ' ' << format_number(-p.c_lp(k)) << '\n';
  for (int i = 0; i < p.num_rows(); ++i) {
    const auto& row = p.rows[static_cast<std::size_t>(i)];
    for (const auto& [blk, a] : row.psd) emit_matrix(i + 1, blk + 1, a, 1.0);
    for (const auto& [idx, v] : row.lp)
      if (v != 0.0) os << i + 1 << ' ' << lp_block << ' ' << idx + 1 << ' ' << idx + 1 << ' ' << format_number(v) << '\n';
  }
}

conic::Problem read_sdpa(std::istream& is) {
  // Header tokens may be separated by commas or braces in SDPA files.
  std::vector<std::string> tokens;
  std::string line;
  int header_needed = 4;
  int nblocks = -1;
  int m = -1;
  std::vector<std::string> entry_lines;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '*' || line[0] == '"') continue;
    if (header_needed > 0) {
      for (char& c : line)
        if (c == ',' || c == '{' || c == '}' || c == '(' || c == ')') c = ' ';
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      // Consume the header greedily: m, nblocks, block sizes, c vector.
      auto ready = [&] {
        if (tokens.size() < 2) return false;
        const int mm = std::stoi(tokens[0]);
        const int nn = std::stoi(tokens[1]);
        return static_cast<int>(tokens.size()) >= 2 + nn + mm;
      };
      if (ready()) header_needed = 0;
      continue;
    }
    entry_lines.push_back(line);
  }
  if (header_needed > 0) throw ValidationError("sdpa", "truncated header");
  m = std::stoi(tokens[0]);
  nblocks = std::stoi(tokens[1]);
  conic::Problem p;
  int lp_block = 0;
  std::vector<int> block_map(static_cast<std::size_t>(nblocks) + 1, -1);
  for (int j = 0; j < nblocks; ++j) {
    const int sz = std::stoi(tokens[static_cast<std::size_t>(2 + j)]);
    if (sz < 0) {
      if (lp_block) throw ValidationError("sdpa", "more than one diagonal block");
      lp_block = j + 1;
      p.lp_dim = -sz;
    } else {
      block_map[static_cast<std::size_t>(j) + 1] = static_cast<int>(p.psd_dims.size());
      p.psd_dims.push_back(sz);
    }
  }
  p.b.resize(m);
  for (int i = 0; i < m; ++i) p.b(i) = parse_number(tokens[static_cast<std::size_t>(2 + nblocks + i)]);

  const std::size_t nb = p.psd_dims.size();
  p.c_psd.assign(nb, Eigen::MatrixXd());
  p.c_lp = Eigen::VectorXd::Zero(p.lp_dim);
  // Dense accumulation, then sparsified per row.
  std::vector<std::map<int, Eigen::MatrixXd>> psd(static_cast<std::size_t>(m));
  std::vector<std::map<int, double>> lp(static_cast<std::size_t>(m));
  for (const auto& l : entry_lines) {
    std::string s = l;
    for (char& c : s)
      if (c == ',' || c == '{' || c == '}') c = ' ';
    std::istringstream ls(s);
    int matno, blk, r, c;
    std::string vs;
    if (!(ls >> matno >> blk >> r >> c >> vs)) continue;
    const double v = parse_number(vs);
    if (matno < 0 || matno > m || blk < 1 || blk > nblocks) throw ValidationError("sdpa", "entry out of range: " + l);
    if (blk == lp_block) {
      if (r != c || r < 1 || r > p.lp_dim) throw ValidationError("sdpa", "bad diagonal-block entry: " + l);
      if (matno == 0) p.c_lp(r - 1) = -v;
      else lp[static_cast<std::size_t>(matno - 1)][r - 1] += v;
      continue;
    }
    const int j = block_map[static_cast<std::size_t>(blk)];
    const int dim = p.psd_dims[static_cast<std::size_t>(j)];
    if (r < 1 || c < 1 || r > dim || c > dim) throw ValidationError("sdpa", "index out of range: " + l);
    Eigen::MatrixXd* a;
    if (matno == 0) {
      auto& cm = p.c_psd[static_cast<std::size_t>(j)];
      if (cm.size() == 0) cm = Eigen::MatrixXd::Zero(dim, dim);
      a = &cm;
    } else {
      auto& rm = psd[static_cast<std::size_t>(matno - 1)];
      auto it = rm.find(j);
      if (it == rm.end()) it = rm.emplace(j, Eigen::MatrixXd::Zero(dim, dim)).first;
      a = &it->second;
    }
    const double sign = matno == 0 ? -1.0 : 1.0;
    (*a)(r - 1, c - 1) = sign * v;
    (*a)(c - 1, r - 1) = sign * v;
  }
  p.rows.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    auto& row = p.rows[static_cast<std::size_t>(i)];
    for (auto& [j, a] : psd[static_cast<std::size_t>(i)]) row.psd.emplace_back(j, std::move(a));
    for (auto& [k, v] : lp[static_cast<std::size_t>(i)]) row.lp.emplace_back(k, v);
  }
  p.validate();
  return p;
}

void export_sdpa(const conic::Problem& p, const std::string& path, const std::string& comment) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(path, "cannot open for writing");
  write_sdpa(p, f, comment);
  if (!f) throw IoError(path, "write failed");
}

void write_sdpa(const ConicProblem& p, std::ostream& os) {
  std::ostringstream c;
  c << "ISCAP beamforming relaxation: K = " << p.num_bs << " BSs, N = " << p.dim << " elements.\n"
    << "Hermitian blocks W_k (block 2k+1) and R_k (block 2k+2) are real-embedded as 2N x 2N\n"
    << "[[Re, -Im], [Im, Re]] matrices, in units of power_scale = " << format_number(p.power_scale) << " W.\n"
    << "Orthant coordinate 1 is Theta / theta_scale with theta_scale = " << format_number(p.theta_scale)
    << " W;\ncoordinates 2.. are row slacks. The SDPA optimum equals max Theta / theta_scale.\n"
    << "Rows:";
  for (const auto& r : p.rows) c << ' ' << r.label;
  write_sdpa(p.to_standard(), os, c.str());
}

void export_sdpa(const ConicProblem& p, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(path, "cannot open for writing");
  write_sdpa(p, f);
  if (!f) throw IoError(path, "write failed");
}

conic::Problem import_sdpa(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(path, "cannot open for reading");
  return read_sdpa(f);
}

// ---------------------------------------------------------------- verify

std::vector<VerifyCheck> run_verify(const Scenario& s, double tol, std::uint64_t seed) {
  s.validate();
  std::vector<VerifyCheck> out;
  auto add = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };
  auto str = [](double v) { return format_number(v); };

  // Channel norm identity at the sensing center.
  {
    const ArrayGeometry& g = s.bs.front();
    const ComplexVector h = channel_vector(g, s.sensing.center);
    double ref = 0.0;
    const double kappa = g.wavenumber();
    for (const auto& e : element_positions(g)) {
      const double r = distance(e, s.sensing.center);
      ref += 1.0 / (4.0 * kappa * kappa * r * r);
    }
    const double rel = std::abs(h.squaredNorm() - ref) / ref;
    add("channel norm identity", rel <= 1e-12, "relative error " + str(rel));
  }
  {
    const double pfa = s.params.false_alarm;
    const double p0 = detection_probability(0.0, s.params.noise_sense, pfa);
    const double x = q_inverse(pfa);
    const double phi = x * x * s.params.noise_sense / 2.0;
    const double p_half = detection_probability(phi, s.params.noise_sense, pfa);
    add("detection kernel", std::abs(p0 - pfa) <= 1e-15 && std::abs(p_half - 0.5) <= 1e-12,
        "P_D(0) = " + str(p0) + ", P_D at threshold = " + str(p_half));
  }
  // Quadrature against a seeded Monte Carlo estimate on a 0.25 m disc.
  {
    const ArrayGeometry& g = s.bs.front();
    const UncertaintyRegion reg = UncertaintyRegion::disc(s.ers.front().region.center, 0.25);
    const CovarianceG q = compute_G(g, reg);
    const MonteCarloG mc = monte_carlo_G(g, reg, 20000, seed);
    double worst = 0.0;
    for (int i = 0; i < q.matrix.rows(); ++i)
      for (int j = 0; j < q.matrix.cols(); ++j) {
        const double se = std::max(mc.standard_error(i, j), 1e-300);
        worst = std::max(worst, std::abs(q.matrix(i, j) - mc.mean(i, j)) / se);
      }
    add("quadrature vs Monte Carlo", worst <= 5.0, "max deviation " + str(worst) + " standard errors");
  }

  const CovarianceSet gset = compute_covariance_set(s);
  const SdrOutcome sdr = solve_coordinated(s, gset, tol);
  if (!sdr.relaxed.report.optimal()) {
    add("SDR tightness", true, std::string("not applicable: relaxation ") + to_string(sdr.relaxed.report.status));
  } else {
    const double rel = std::abs(sdr.reconstructed_objective - sdr.relaxed.theta) / sdr.relaxed.theta;
    add("SDR tightness", rel <= 1e-6 && sdr.check.max_violation <= 1e-6,
        "objective gap " + str(rel) + ", max violation " + str(sdr.check.max_violation));
  }
  const CorollaryReport cor = verify_corollary(s, gset, tol);
  if (!cor.all_optimal) {
    add("Type-I / Type-II equality", true, "not applicable: some CU type infeasible");
  } else {
    const bool order = cor.theta_type3 >= cor.theta_type2 * (1.0 - 1e-6);
    add("Type-I / Type-II equality", cor.relative_gap <= 1e-5 && order,
        "relative gap " + str(cor.relative_gap) + ", Theta_III / Theta_II = " +
            str(cor.theta_type3 / cor.theta_type2));
  }
  {
    const SweepRow a = solve_cell(s, gset, Method::SDR, tol);
    const SweepRow b = solve_cell(s, gset, Method::MRT, tol);
    const SweepRow c = solve_cell(s, gset, Method::NonCoordinated, tol);
    if (a.status == SolveStatus::Optimal && b.status == SolveStatus::Optimal)
      add("SDR >= MRT", a.detection >= b.detection - 1e-9,
          "P_D " + str(a.detection) + " vs " + str(b.detection));
    else
      add("SDR >= MRT", true, "not applicable: a method did not solve");
    if (a.status == SolveStatus::Optimal && c.status == SolveStatus::Optimal && c.max_violation > 1e-6)
      // Per-cell designs ignore cross-cell interference and may miss the SINR targets.
      add("SDR >= non-coordinated", true,
          "not applicable: non-coordinated design violates its constraints (max violation " + str(c.max_violation) + ")");
    else if (a.status == SolveStatus::Optimal && c.status == SolveStatus::Optimal)
      add("SDR >= non-coordinated", a.detection >= c.detection - 1e-9,
          "P_D " + str(a.detection) + " vs " + str(c.detection) + " (non-coordinated violation " +
              str(c.max_violation) + ")");
    else
      add("SDR >= non-coordinated", true, "not applicable: a method did not solve");
  }
  {
    SweepSpec spec;
    spec.parameter = SweepParameter::SinrDb;
    spec.grid = {0.0, 5.0, 10.0};
    spec.methods = {Method::SDR};
    spec.cu_types = {CuType::TypeIII};
    spec.tol = tol;
    const SweepTable t = run_sweep(spec, s);
    bool ok = true;
    std::string d;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : t.rows) {
      d += str(r.detection) + " ";
      if (r.status != SolveStatus::Optimal) continue;
      ok = ok && r.detection <= prev + 1e-9;
      prev = r.detection;
    }
    add("P_D non-increasing in Gamma", ok, "P_D at 0/5/10 dB: " + d);
  }
  return out;
}

}  // namespace iscap
