#include "toruslab/circle_ifs.hpp"
#include "toruslab/cone_analysis.hpp"
#include "toruslab/maps.hpp"
#include "toruslab/orbit_lab.hpp"
#include "toruslab/params.hpp"
#include "toruslab/perturbations.hpp"
#include "toruslab/singular_analysis.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace toruslab;

namespace {

using MapHandle = std::shared_ptr<TorusMap>;

// JSON crosses the boundary as text; the python side sees plain dicts.
py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_py(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

ConstructionParams params_arg(const py::object& o, int n) {
  if (o.is_none()) return default_params(n);
  return params_from_json(from_py(o));
}

Vec to_vec(const std::vector<double>& x) {
  if (x.empty() || x.size() > static_cast<std::size_t>(kMaxDim)) throw DomainError("point has an unsupported dimension");
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

py::array_t<double> to_array(const Vec& v) {
  py::array_t<double> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out.mutable_at(i) = v[i];
  return out;
}

py::array_t<double> to_array(const Mat& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.mutable_at(i, j) = m(i, j);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  m.def("default_params", [](int n, double kappa) { return to_py(to_json(default_params(n, kappa))); }, py::arg("n") = 2,
        py::arg("kappa") = 0.1);
  m.def("validate_params", [](const py::object& p) { return to_py(validate_params(params_from_json(from_py(p))).to_json()); });

  py::class_<TorusMap, MapHandle>(m, "TorusMap")
      .def_property_readonly("dim", &TorusMap::dim)
      .def_property_readonly("tag", &TorusMap::tag)
      .def("apply", [](const TorusMap& f, const std::vector<double>& x) { return to_array(f.apply(to_vec(x))); })
      .def("jacobian", [](const TorusMap& f, const std::vector<double>& x) { return to_array(f.jacobian(to_vec(x))); })
      .def("det", [](const TorusMap& f, const std::vector<double>& x) { return f.det(to_vec(x)); })
      .def("orbit", [](const MapHandle& f, const std::vector<double>& x0, long steps) {
        auto pts = orbit_prefix(*f, to_vec(x0), steps);
        py::array_t<double> out({static_cast<py::ssize_t>(pts.size()), static_cast<py::ssize_t>(f->dim())});
        for (std::size_t i = 0; i < pts.size(); ++i)
          for (int j = 0; j < f->dim(); ++j) out.mutable_at(i, j) = pts[i][j];
        return out;
      });

  m.def("linear_map", [](int n) -> MapHandle { return std::make_shared<LinearExpanding>(n); }, py::arg("n") = 2);
  m.def("blender_map", [](const py::object& p, int n) -> MapHandle { return std::make_shared<BlenderMap>(params_arg(p, n)); },
        py::arg("params") = py::none(), py::arg("n") = 2);
  m.def("singular_map",
        [](const py::object& p, int n) -> MapHandle { return std::make_shared<SingularMap>(params_arg(p, n)); },
        py::arg("params") = py::none(), py::arg("n") = 2);
  m.def(
      "perturbed_map",
      [](const MapHandle& base, std::uint64_t seed, double budget) -> MapHandle {
        return std::make_shared<PerturbedMap>(base, make_perturbation(base->dim(), seed, budget));
      },
      py::arg("base"), py::arg("seed"), py::arg("budget"));
  m.def("perturbation", [](int n, std::uint64_t seed, double budget) { return to_py(make_perturbation(n, seed, budget).to_json()); },
        py::arg("n"), py::arg("seed"), py::arg("budget"));

  m.def(
      "verify_cones",
      [](const MapHandle& f, const py::object& p, long points, int vectors, std::uint64_t seed, bool expansion) {
        SweepOptions opt;
        opt.points = points;
        opt.vectors_per_point = vectors;
        opt.seed = seed;
        auto params = params_arg(p, f->dim());
        py::gil_scoped_release nogil;
        auto r = expansion ? verify_expansion(*f, params, opt) : verify_cone_invariance(*f, params, opt);
        py::gil_scoped_acquire gil;
        return to_py(r.to_json());
      },
      py::arg("map"), py::arg("params") = py::none(), py::arg("points") = 10000, py::arg("vectors") = 10,
      py::arg("seed") = 0, py::arg("expansion") = false);

  m.def(
      "fixed_points",
      [](const MapHandle& f) {
        py::list out;
        for (const auto& fp : find_and_classify_fixed_points(*f, default_fixed_point_seeds(f->dim()))) {
          py::dict d;
          d["point"] = to_array(fp.point);
          d["residual"] = fp.residual;
          d["moduli"] = fp.moduli;
          d["class"] = to_string(fp.cls);
          out.append(d);
        }
        return out;
      },
      py::arg("map"));

  m.def(
      "persistence",
      [](const py::object& p, int count, double size, std::uint64_t seed, int n) {
        auto params = params_arg(p, n);
        py::gil_scoped_release nogil;
        auto s = persistence_harness(params, count, size, seed);
        py::gil_scoped_acquire gil;
        return to_py(s.to_json());
      },
      py::arg("params") = py::none(), py::arg("count") = 200, py::arg("size") = 0.5, py::arg("seed") = 0,
      py::arg("n") = 2);

  m.def(
      "density",
      [](const MapHandle& f, int grid, long iterations, int count, std::uint64_t seed) {
        std::vector<DensityReport> reps;
        {
          py::gil_scoped_release nogil;
          reps = density_experiment(*f, grid, iterations, count, seed);
        }
        py::list out;
        for (const auto& r : reps) out.append(to_py(r.to_json()));
        return out;
      },
      py::arg("map"), py::arg("grid") = 100, py::arg("iterations") = 1000000, py::arg("count") = 1, py::arg("seed") = 0);

  m.def(
      "minimality",
      [](double a0, double center, double length, int max_steps) {
        auto r = check_minimality(build_ifs(a0), {center, length}, max_steps);
        py::dict d;
        d["covered"] = r.covered;
        d["steps"] = r.steps;
        d["obstructed"] = r.obstructed;
        d["final_length"] = r.final_length;
        d["failure"] = r.failure;
        return d;
      },
      py::arg("a0"), py::arg("center"), py::arg("length"), py::arg("max_steps") = 200);
}
