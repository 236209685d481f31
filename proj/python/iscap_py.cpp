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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "iscap/covariance.hpp"
#include "iscap/error.hpp"
#include "iscap/experiments.hpp"
#include "iscap/geometry.hpp"
#include "iscap/metrics.hpp"
#include "iscap/numerics.hpp"
#include "iscap/scenario.hpp"
#include "iscap/sdr.hpp"

namespace py = pybind11;
using namespace iscap;

namespace {

struct PySolution {
  SweepRow row;
  BeamformingSolution beams;
};

CuType cu_type_arg(const py::object& o) {
  if (py::isinstance<CuType>(o)) return o.cast<CuType>();
  return parse_cu_type(o.cast<std::string>());
}

std::vector<CuType> cu_types_arg(const py::object& o) {
  std::vector<CuType> out;
  if (py::isinstance<py::str>(o) || py::isinstance<CuType>(o)) return {cu_type_arg(o)};
  for (auto item : o) out.push_back(cu_type_arg(py::reinterpret_borrow<py::object>(item)));
  return out;
}

Scenario prepared(const Scenario& s, const py::object& cu_type) {
  return cu_type.is_none() ? s : with_cu_type(s, cu_type_arg(cu_type));
}

}  // namespace

PYBIND11_MODULE(_iscap, m) {
  m.doc() = "Coordinated near-field ISAC beamforming with wireless power transfer";

  // Registered base first; translators run most recent first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  py::enum_<CuType>(m, "CuType")
      .value("I", CuType::TypeI)
      .value("II", CuType::TypeII)
      .value("III", CuType::TypeIII);

  py::enum_<SolveStatus>(m, "SolveStatus")
      .value("OPTIMAL", SolveStatus::Optimal)
      .value("INFEASIBLE", SolveStatus::Infeasible)
      .value("NUMERICAL_FAILURE", SolveStatus::NumericalFailure);

  m.def("q_function", &q_function, py::arg("x"));
  m.def("q_inverse", &q_inverse, py::arg("p"));
  m.def("detection_probability", &detection_probability, py::arg("echo_power"), py::arg("noise_power"),
        py::arg("false_alarm"));
  m.def("dbm_to_watt", &dbm_to_watt);
  m.def("watt_to_dbm", &watt_to_dbm);
  m.def("db_to_ratio", &db_to_ratio);
  m.def("ratio_to_db", &ratio_to_db);

  py::class_<Scenario>(m, "Scenario")
      .def_static("builtin", &builtin_case, py::arg("case_id"))
      .def_static("from_json", [](const std::string& doc) { return load_scenario(doc); }, py::arg("document"))
      .def_static("from_file", &load_scenario_file, py::arg("path"))
      .def("to_json", &serialize_scenario)
      .def("with_elements", &with_elements, py::arg("n"))
      .def("with_sinr_db", &with_sinr_db, py::arg("sinr_db"))
      .def("with_harvest_dbm", &with_harvest_dbm, py::arg("harvest_dbm"))
      .def("with_uncertainty_area", &with_uncertainty_area, py::arg("area_m2"))
      .def("with_power_budget_dbm", &with_power_budget_dbm, py::arg("pmax_dbm"))
      .def("with_cu_type", [](const Scenario& s, const py::object& t) { return with_cu_type(s, cu_type_arg(t)); },
           py::arg("cu_type"))
      .def_property_readonly("num_bs", &Scenario::num_bs)
      .def_property_readonly("elements", &Scenario::elements)
      .def_property_readonly("wavelength", &Scenario::wavelength)
      .def_property_readonly("label", [](const Scenario& s) { return s.label; })
      .def_property_readonly("power_budget", [](const Scenario& s) { return s.params.power_budget; })
      .def_property_readonly("sensing_points",
                             [](const Scenario& s) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& p : s.sensing.points) out.emplace_back(p.x, p.y);
                               return out;
                             })
      .def(
          "channel",
          [](const Scenario& s, int bs, double x, double y) {
            return ComplexVector(channel_vector(s.bs.at(static_cast<std::size_t>(bs)), Point2D{x, y}));
          },
          py::arg("bs"), py::arg("x"), py::arg("y"))
      .def(
          "rayleigh_distance",
          [](const Scenario& s, int bs) { return rayleigh_distance(s.bs.at(static_cast<std::size_t>(bs))); },
          py::arg("bs") = 0)
      .def("__repr__", [](const Scenario& s) {
        return "<Scenario '" + s.label + "' K=" + std::to_string(s.num_bs()) + " N=" + std::to_string(s.elements()) +
               ">";
      });

  py::class_<PySolution>(m, "Solution")
      .def_property_readonly("status", [](const PySolution& p) { return p.row.status; })
      .def_property_readonly("optimal", [](const PySolution& p) { return p.row.status == SolveStatus::Optimal; })
      .def_property_readonly("method", [](const PySolution& p) { return std::string(to_string(p.row.method)); })
      .def_property_readonly("theta", [](const PySolution& p) { return p.row.theta; })
      .def_property_readonly("detection_probability", [](const PySolution& p) { return p.row.detection; })
      .def_property_readonly("worst_point", [](const PySolution& p) { return p.row.worst_point; })
      .def_property_readonly("max_violation", [](const PySolution& p) { return p.row.max_violation; })
      .def_property_readonly("message", [](const PySolution& p) { return p.row.message; })
      .def_property_readonly("seconds", [](const PySolution& p) { return p.row.seconds; })
      .def_property_readonly("info_beams", [](const PySolution& p) { return p.beams.info_beams; })
      .def_property_readonly("dual_covariances", [](const PySolution& p) { return p.beams.dual_covariances; })
      .def("transmit_power", [](const PySolution& p, int k) { return p.beams.transmit_power(k); }, py::arg("bs"))
      .def("__repr__", [](const PySolution& p) {
        std::ostringstream os;
        os << "<Solution " << to_string(p.row.method) << " " << to_string(p.row.status) << " P_D=" << p.row.detection
           << ">";
        return os.str();
      });

  m.def(
      "solve",
      [](const Scenario& s, const std::string& method, const py::object& cu_type, double tol) {
        const Scenario sc = prepared(s, cu_type);
        sc.validate();
        PySolution out;
        {
          py::gil_scoped_release release;
          const CovarianceSet g = compute_covariance_set(sc);
          out.row = solve_cell(sc, g, parse_method(method), tol, &out.beams);
        }
        return out;
      },
      py::arg("scenario"), py::arg("method") = "sdr", py::arg("cu_type") = py::none(),
      py::arg("tol") = kDefaultSdpTol,
      "Solve one scenario; method is sdr, mrt, mrt-asymptotic, noncoordinated or worstcase-robust.");

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("grid_index", &SweepRow::grid_index)
      .def_readonly("value", &SweepRow::value)
      .def_property_readonly("method", [](const SweepRow& r) { return std::string(to_string(r.method)); })
      .def_readonly("cu_type", &SweepRow::cu_type)
      .def_readonly("status", &SweepRow::status)
      .def_readonly("theta", &SweepRow::theta)
      .def_readonly("detection_probability", &SweepRow::detection)
      .def_readonly("max_violation", &SweepRow::max_violation)
      .def_readonly("message", &SweepRow::message);

  m.def(
      "sweep",
      [](const Scenario& s, const std::string& parameter, const std::vector<double>& grid,
         const std::vector<std::string>& methods, const py::object& cu_types, unsigned workers) {
        SweepSpec spec;
        spec.parameter = parse_sweep_parameter(parameter);
        spec.grid = grid;
        spec.methods.clear();
        for (const auto& name : methods) spec.methods.push_back(parse_method(name));
        spec.cu_types = cu_types_arg(cu_types);
        spec.workers = workers;
        py::gil_scoped_release release;
        return run_sweep(spec, s).rows;
      },
      py::arg("scenario"), py::arg("parameter"), py::arg("grid"), py::arg("methods") = std::vector<std::string>{"sdr"},
      py::arg("cu_types") = "III", py::arg("workers") = 0);

  m.def(
      "power_map",
      [](const Scenario& s, const std::string& method, int nx, int ny) {
        const CovarianceSet g = compute_covariance_set(s);
        BeamformingSolution sol;
        const SweepRow row = solve_cell(s, g, parse_method(method), kDefaultSdpTol, &sol);
        if (row.status != SolveStatus::Optimal)
          throw DomainError("power_map: " + std::string(to_string(row.status)) + ": " + row.message);
        PowerMapSpec spec;
        spec.nx = nx;
        spec.ny = ny;
        return power_map(sol, s, spec).values;
      },
      py::arg("scenario"), py::arg("method") = "sdr", py::arg("nx") = 90, py::arg("ny") = 80,
      "Received power (W) per BS on the default 90 m x 80 m grid, indexed [iy, ix].");

  m.def(
      "verify",
      [](const Scenario& s, double tol, std::uint64_t seed) {
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& c : run_verify(s, tol, seed)) out.emplace_back(c.name, c.passed, c.detail);
        return out;
      },
      py::arg("scenario"), py::arg("tol") = kDefaultSdpTol, py::arg("seed") = 1);

  m.def(
      "export_sdpa",
      [](const Scenario& s, const py::object& cu_type) {
        const Scenario sc = prepared(s, cu_type);
        const ConicProblem p = build_sdr(sc, compute_covariance_set(sc));
        std::ostringstream os;
        write_sdpa(p, os);
        return os.str();
      },
      py::arg("scenario"), py::arg("cu_type") = py::none(),
      "Relaxation in SDPA sparse format (real embedding, minimizes -Theta).");
}
