#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>
#include <string>

#include "logheat/bounds.hpp"
#include "logheat/counterexample.hpp"
#include "logheat/errors.hpp"
#include "logheat/heatflow.hpp"
#include "logheat/measure_io.hpp"
#include "logheat/measures.hpp"
#include "logheat/transport.hpp"

namespace py = pybind11;
using namespace logheat;

namespace {

// Measures cross the boundary as JSON text in the measure file format.
Measure parse(const std::string& text) { return measure_from_json(nlohmann::json::parse(text)); }

}  // namespace

PYBIND11_MODULE(_logheat, mod) {
  mod.doc() = "Log-concavity along heat and Ornstein-Uhlenbeck flows";

  auto base = py::register_exception<Error>(mod, "Error");
  py::register_exception<ValidationError>(mod, "ValidationError", base.ptr());
  py::register_exception<DomainError>(mod, "DomainError", base.ptr());
  py::register_exception<CapabilityError>(mod, "CapabilityError", base.ptr());
  py::register_exception<PreconditionError>(mod, "PreconditionError", base.ptr());
  py::register_exception<BracketError>(mod, "BracketError", base.ptr());
  py::register_exception<SearchError>(mod, "SearchError", base.ptr());
  py::register_exception<NumericalError>(mod, "NumericalError", base.ptr());

  py::class_<Envelope>(mod, "Envelope")
      .def_readonly("lower", &Envelope::lower)
      .def_readonly("upper", &Envelope::upper);
  py::class_<IntegratedOuUpper>(mod, "IntegratedOuUpper")
      .def_readonly("closed_form", &IntegratedOuUpper::closed_form)
      .def_readonly("numeric", &IntegratedOuUpper::numeric)
      .def_readonly("tail", &IntegratedOuUpper::tail);
  py::class_<TransportConstants>(mod, "TransportConstants")
      .def_readonly("caffarelli", &TransportConstants::caffarelli)
      .def_readonly("thm3", &TransportConstants::thm3)
      .def_readonly("fms", &TransportConstants::fms);
  py::class_<Certificate>(mod, "Certificate")
      .def_readonly("t", &Certificate::t)
      .def_readonly("target_m", &Certificate::target_m)
      .def_readonly("j", &Certificate::j)
      .def_readonly("z_star", &Certificate::z_star)
      .def_readonly("variance", &Certificate::variance)
      .def_readonly("curvature", &Certificate::curvature)
      .def_readonly("truncation", &Certificate::truncation)
      .def_readonly("tail_bound", &Certificate::tail_bound)
      .def_readonly("lower_mass", &Certificate::lower_mass);
  py::class_<TwoAtomReport>(mod, "TwoAtomReport")
      .def_readonly("z_bar", &TwoAtomReport::z_bar)
      .def_readonly("curvature_at_z_bar", &TwoAtomReport::curvature_at_z_bar)
      .def_readonly("analytic_value", &TwoAtomReport::analytic_value)
      .def_readonly("grid_min_curvature", &TwoAtomReport::grid_min_curvature);
  py::class_<FlowMap>(mod, "FlowMap")
      .def_readonly("inputs", &FlowMap::inputs)
      .def_readonly("images", &FlowMap::images)
      .def_readonly("t_max", &FlowMap::t_max)
      .def_readonly("monotone", &FlowMap::monotone)
      .def("__call__", &FlowMap::operator());

  mod.def("thm2_envelope", &thm2_envelope, py::arg("alpha"), py::arg("lip"), py::arg("t"));
  mod.def("cor7_envelope", &cor7_envelope, py::arg("alpha"), py::arg("lip"), py::arg("t"));
  mod.def("log_concavity_time", &log_concavity_time, py::arg("alpha"), py::arg("lip"));
  mod.def("compact_support_lower", &compact_support_lower, py::arg("radius"), py::arg("t"));
  mod.def("integrated_ou_upper", &integrated_ou_upper, py::arg("alpha"), py::arg("lip"),
          py::arg("horizon_tau") = 1e4);
  mod.def(
      "transport_constants",
      [](double alpha, double lip, double radius, double third_deriv, double beta) {
        return transport_constants({alpha, lip, radius, third_deriv, beta});
      },
      py::arg("alpha"), py::arg("lip"), py::arg("radius") = 0.0, py::arg("third_deriv") = 0.0,
      py::arg("beta") = 0.0);
  mod.def("lsi_transfer", &lsi_transfer, py::arg("c"), py::arg("lip_map"));

  mod.def(
      "variance_certificate",
      [](const std::string& psi, double coef, int truncation, double t, double m) {
        return variance_certificate(build_counterexample({parse_psi(psi), coef}, truncation), t, m);
      },
      py::arg("psi") = "zero", py::arg("coef") = 1.0, py::arg("truncation") = 60,
      py::arg("t") = 1.0, py::arg("M") = 10.0);
  mod.def("two_atom_analysis", &two_atom_analysis, py::arg("x0"), py::arg("w0") = 0.5,
          py::arg("w1") = 0.5, py::arg("t") = 1.0);

  mod.def(
      "log_hessian_heat",
      [](const std::string& measure, const Point& z, double t) {
        return log_hessian_heat(parse(measure), z, t);
      },
      py::arg("measure"), py::arg("z"), py::arg("t"));
  mod.def(
      "build_flow_map",
      [](const std::string& measure, int n_points, double steps_per_unit) {
        FlowOptions o;
        o.n_points = n_points;
        o.steps_per_unit = steps_per_unit;
        return build_flow_map(parse(measure), o);
      },
      py::arg("measure"), py::arg("n_points") = 201, py::arg("steps_per_unit") = 100.0);
  mod.def(
      "empirical_lipschitz", [](const FlowMap& f) { return empirical_lipschitz(f).value; },
      py::arg("flow"));
  mod.def(
      "sample_1d",
      [](const std::string& measure, std::size_t n, std::uint64_t seed) {
        return sample_1d(parse(measure), n, seed);
      },
      py::arg("measure"), py::arg("n"), py::arg("seed") = 0);
}
