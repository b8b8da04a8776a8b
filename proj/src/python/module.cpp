// Python bindings: the rotation action, the counting helpers, and the
// experiment runner behind the command-line tool.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "zdtl/comparison.hpp"
#include "zdtl/experiment.hpp"
#include "zdtl/lattice.hpp"
#include "zdtl/marker.hpp"

namespace py = pybind11;
using namespace zdtl;
using dynsys::RotationAction;
using dynsys::TorusPoint;

namespace {

TorusPoint point(const std::vector<double>& x) { return TorusPoint::from_coords(x); }

LatticeVector lattice_vector(const std::vector<std::int64_t>& n) {
  LatticeVector v(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) v[i] = n[i];
  return v;
}

comparison::OpenSet open_set(const std::vector<std::pair<std::vector<double>, double>>& balls,
                             std::size_t m) {
  comparison::OpenSet s(m);
  for (const auto& [c, r] : balls) s.add(point(c), r);
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Z^d torus rotations: tilings, towers and comparison checks";
  py::register_exception<Error>(mod, "Error", PyExc_RuntimeError);
  py::register_exception<experiment::ConfigError>(mod, "ConfigError", PyExc_ValueError);

  py::class_<RotationAction>(mod, "RotationAction")
      .def(py::init<std::vector<std::vector<double>>, int>(), py::arg("rows"),
           py::arg("independence_window") = 50)
      .def_static("default", &RotationAction::default_for, py::arg("d"))
      .def_property_readonly("rank", &RotationAction::rank)
      .def_property_readonly("torus_dim", &RotationAction::torus_dim)
      .def_property_readonly("matrix", &RotationAction::matrix)
      .def(
          "act",
          [](const RotationAction& a, const std::vector<double>& x,
             const std::vector<std::int64_t>& n) { return dynsys::act(a, point(x), lattice_vector(n)).coords(); },
          py::arg("x"), py::arg("n"), "T^n x as a list of coordinates in [0, 1)");

  mod.def(
      "marker_constants",
      [](const RotationAction& a, const std::vector<double>& center, double r_inner, double r_outer) {
        const auto m = marker::make_marker(a, {point(center), r_inner, r_outer});
        return py::dict(py::arg("M") = m.M, py::arg("L") = m.L);
      },
      py::arg("action"), py::arg("center"), py::arg("r_inner"), py::arg("r_outer"));

  mod.def("find_N0", &lattice::find_N0, py::arg("epsilon"), py::arg("r"), py::arg("d"));
  mod.def("boundary_ratio", &lattice::boundary_ratio, py::arg("N"), py::arg("r"), py::arg("d"));
  mod.def("steiner_outer_volume_box", &lattice::steiner_outer_volume_box, py::arg("N"),
          py::arg("e"), py::arg("d"));
  mod.def("check_rank_domination", &comparison::check_rank_domination, py::arg("rank_a"),
          py::arg("rank_b"));

  mod.def(
      "ocap_estimate",
      [](const RotationAction& a, const std::vector<std::pair<std::vector<double>, double>>& balls,
         std::int64_t N, std::uint64_t seed, std::size_t samples) {
        return comparison::ocap_estimate(a, open_set(balls, a.torus_dim()), N, seed, samples).value;
      },
      py::arg("action"), py::arg("balls"), py::arg("N"), py::arg("seed") = 1,
      py::arg("samples") = 100, "balls: list of (center, radius)");

  mod.def("commands", &experiment::commands);
  mod.def(
      "run",
      [](const std::string& command, const std::map<std::string, std::string>& settings) {
        const auto cfg = experiment::load_config(settings);
        py::gil_scoped_release release;
        const auto res = experiment::run(command, cfg);
        return std::make_pair(res.exit_code, res.output);
      },
      py::arg("command"), py::arg("settings") = std::map<std::string, std::string>{},
      "Runs a CLI command; returns (exit_code, output text).");
}
