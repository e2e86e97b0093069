#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pqn/catalog.hpp"
#include "pqn/cli.hpp"
#include "pqn/io.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Poisson quasi-Nijenhuis and Haantjes identity checks";

  static py::exception<pqn::InputError> input_error(m, "InputError", PyExc_ValueError);
  static py::exception<pqn::ParseError> parse_error(m, "ExpressionError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const pqn::InputError& e) {
      // args: (message, line, column)
      PyErr_SetObject(input_error.ptr(), py::make_tuple(e.what(), e.line(), e.column()).ptr());
    } catch (const pqn::ParseError& e) {
      PyErr_SetObject(parse_error.ptr(), py::make_tuple(e.what(), e.offset()).ptr());
    }
  });

  m.def("catalog_names", &pqn::catalog_names);
  m.def("suite_names", &pqn::suite_names);

  m.def(
      "catalog",
      [](const std::string& name, const std::map<std::string, std::string>& params) {
        return pqn::write_structure(pqn::catalog_entry(name, params));
      },
      py::arg("name"), py::arg("params") = std::map<std::string, std::string>{},
      "Structure file text of a catalog entry.");

  m.def(
      "normalize", [](const std::string& text) { return pqn::write_structure(pqn::parse_structure(text)); },
      py::arg("text"), "Parses a structure file and writes it back in canonical form.");

  m.def(
      "verify",
      [](const std::string& text, const std::vector<std::string>& suites, std::uint64_t seed, std::size_t samples,
         double tol, const std::string& box, unsigned kmax, std::optional<std::size_t> resample_limit, bool table) {
        pqn::VerifyOptions o;
        o.suites = suites;
        o.seed = seed;
        o.samples = samples;
        o.tol = tol;
        o.box = box;
        o.kmax = kmax;
        o.resample_limit = resample_limit;
        o.table = table;
        py::gil_scoped_release release;
        const pqn::VerifyOutcome v = pqn::verify_document(text, o);
        return std::make_tuple(v.pass, v.report, v.failed);
      },
      py::arg("text"), py::arg("suites") = std::vector<std::string>{}, py::arg("seed") = 42,
      py::arg("samples") = 64, py::arg("tol") = 1e-8, py::arg("box") = "-1:1", py::arg("kmax") = 5,
      py::arg("resample_limit") = py::none(), py::arg("table") = false,
      "Runs suites on a structure file; returns (pass, report_json, failed_names).");

  m.def(
      "derivative",
      [](const std::string& expr, const std::vector<std::string>& coords, std::size_t index) {
        const pqn::Chart chart(coords);
        if (index >= chart.dim()) throw py::index_error("coordinate index out of range");
        return pqn::to_string(pqn::derive(pqn::parse(expr, chart), index), chart);
      },
      py::arg("expr"), py::arg("coords"), py::arg("index"));

  m.def(
      "evaluate",
      [](const std::string& expr, const std::vector<std::string>& coords, const std::vector<double>& point) {
        const pqn::Chart chart(coords);
        if (point.size() != chart.dim()) throw py::value_error("point has the wrong dimension");
        return pqn::evaluate(pqn::parse(expr, chart), point);
      },
      py::arg("expr"), py::arg("coords"), py::arg("point"), "Value at a point, or None where undefined.");
}
