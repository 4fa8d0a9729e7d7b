#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "hho/experiments.hpp"

namespace py = pybind11;
using namespace hho;

namespace {

py::array_t<double> sample_fields(const SolvedCase& sc, int resolution) {
  std::ostringstream os;
  {
    py::gil_scoped_release release;
    dump_fields(sc, os, resolution);
  }
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  py::array_t<double> out({static_cast<py::ssize_t>(resolution) * resolution, py::ssize_t{6}});
  auto a = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < 6; ++j) is >> a(i, j);
  if (!is) throw Error("field dump ended early");
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Enriched HHO Stokes solver on cut meshes around cylinders";
  py::register_exception<Error>(m, "HHOError", PyExc_RuntimeError);

  py::enum_<TestCase>(m, "TestCase").value("A", TestCase::A).value("B", TestCase::B);
  py::enum_<TestASolution>(m, "TestASolution")
      .value("manufactured", TestASolution::manufactured)
      .value("cylinder", TestASolution::cylinder);

  py::class_<Circle>(m, "Circle")
      .def(py::init([](std::pair<double, double> c, double r) { return Circle{{c.first, c.second}, r}; }),
           py::arg("center"), py::arg("radius"))
      .def_property_readonly("center", [](const Circle& c) { return std::make_pair(c.center.x(), c.center.y()); })
      .def_readonly("radius", &Circle::radius)
      .def("__repr__", [](const Circle& c) {
        std::ostringstream os;
        os << "Circle(center=(" << c.center.x() << ", " << c.center.y() << "), radius=" << c.radius << ")";
        return os.str();
      });

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("test", &ExperimentConfig::test)
      .def_readwrite("k", &ExperimentConfig::k)
      .def_readwrite("gamma", &ExperimentConfig::gamma)
      .def_readwrite("radius", &ExperimentConfig::radius)
      .def_readwrite("meshes", &ExperimentConfig::meshes)
      .def_readwrite("reference_mesh", &ExperimentConfig::reference_mesh)
      .def_readwrite("solution", &ExperimentConfig::solution)
      .def_readwrite("scale", &ExperimentConfig::scale)
      .def_readwrite("out", &ExperimentConfig::out)
      .def_readwrite("dump_fields", &ExperimentConfig::dump_fields)
      .def_readwrite("dump_mesh", &ExperimentConfig::dump_mesh);

  m.def(
      "config_from_text",
      [](const std::string& text, ExperimentConfig config) {
        std::istringstream is(text);
        read_config(is, config);
        return config;
      },
      py::arg("text"), py::arg("base") = ExperimentConfig{},
      "Parse `key = value` lines on top of `base`.");
  m.def("default_meshes", &default_meshes, py::arg("test"));
  m.def("test_b_cylinders", &test_b_cylinders);
  m.def("table_name", &table_name, py::arg("config"));

  py::class_<SolutionResiduals>(m, "SolutionResiduals")
      .def_readonly("divergence", &SolutionResiduals::divergence)
      .def_readonly("pressure_mean", &SolutionResiduals::pressure_mean)
      .def_readonly("velocity_norm", &SolutionResiduals::velocity_norm)
      .def_readonly("pressure_norm", &SolutionResiduals::pressure_norm);

  py::class_<MeshRow>(m, "MeshRow")
      .def_readonly("n", &MeshRow::n)
      .def_readonly("h", &MeshRow::h)
      .def_readonly("cells", &MeshRow::cells)
      .def_readonly("internal_faces", &MeshRow::internal_faces)
      .def_readonly("dofs", &MeshRow::dofs)
      .def_readonly("errors", &MeshRow::errors)
      .def_readonly("residuals", &MeshRow::residuals)
      .def_readonly("pressure_norm", &MeshRow::pressure_norm)
      .def_readonly("h1_seminorm", &MeshRow::h1_seminorm);

  py::class_<ErrorReport>(m, "ErrorReport")
      .def_readonly("test", &ErrorReport::test)
      .def_readonly("columns", &ErrorReport::columns)
      .def_readonly("rows", &ErrorReport::rows)
      .def_readonly("reference_pressure_norm", &ErrorReport::reference_pressure_norm)
      .def_readonly("reference_h1_seminorm", &ErrorReport::reference_h1_seminorm)
      .def("table", [](const ErrorReport& r) {
        std::ostringstream os;
        emit_table(r, os);
        return os.str();
      });

  m.def("run", &run, py::arg("config"), py::call_guard<py::gil_scoped_release>(),
        "Run the configured mesh sequence and return the error report.");

  py::class_<SolvedCase, std::unique_ptr<SolvedCase>>(m, "SolvedCase")
      .def_property_readonly("dofs", [](const SolvedCase& sc) { return count_dofs(sc.disc); })
      .def_property_readonly("cells", [](const SolvedCase& sc) { return sc.mesh.elements.size(); })
      .def_property_readonly("internal_faces", [](const SolvedCase& sc) { return sc.mesh.num_internal_faces(); })
      .def_property_readonly("residuals", [](const SolvedCase& sc) { return residuals(sc.assembly, sc.solution); })
      .def_property_readonly("multiplier", [](const SolvedCase& sc) { return sc.solution.multiplier; })
      .def("sample_fields", &sample_fields, py::arg("resolution") = 200,
           "Rows (x, y, u_x, u_y, p, mask) at the cell centres of a resolution^2 grid.");
  m.def("solve_case", &solve_case, py::arg("config"), py::arg("n"), py::call_guard<py::gil_scoped_release>());

  m.def(
      "cylinder_solution",
      [](const Circle& c, double x, double y) {
        const CylinderSolution s{c};
        const Vector2 u = s.velocity({x, y}).value;
        return py::make_tuple(u.x(), u.y(), s.pressure({x, y}).value);
      },
      py::arg("circle"), py::arg("x"), py::arg("y"), "Exact (u_x, u_y, p) of flow past one cylinder.");
}
