#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "atmpc/checks.hpp"
#include "atmpc/config.hpp"
#include "atmpc/polytope_json.hpp"
#include "atmpc/solver.hpp"
#include "atmpc/trace_io.hpp"

namespace py = pybind11;
using namespace atmpc;

namespace {

Mat stack(const std::vector<Vec>& rows) {
  if (rows.empty()) return Mat(0, 0);
  Mat M(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) M.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return M;
}

std::vector<Vec> unstack(const Mat& M) {
  std::vector<Vec> rows;
  for (Eigen::Index i = 0; i < M.rows(); ++i) rows.push_back(M.row(i).transpose());
  return rows;
}

}  // namespace

PYBIND11_MODULE(_atmpc, m) {
  m.doc() = "Adaptive tube MPC core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);

  py::class_<Polytope>(m, "Polytope")
      .def_static("box", &Polytope::box, py::arg("lower"), py::arg("upper"))
      .def_static("from_hrep", py::overload_cast<const Mat&, const Vec&>(&Polytope::from_hrep), py::arg("normals"),
                  py::arg("offsets"))
      .def_static("from_vertices", [](const Mat& pts) { return Polytope::from_vrep(unstack(pts)); },
                  py::arg("points"), "one point per row")
      .def_static("from_json", [](const std::string& s) { return polytope_from_json(nlohmann::json::parse(s)); })
      .def_property_readonly("dim", &Polytope::dim)
      .def_property_readonly("vertices", [](const Polytope& p) { return stack(p.vertices()); })
      .def_property_readonly("normals", [](const Polytope& p) { return p.hrep().normals; })
      .def_property_readonly("offsets", [](const Polytope& p) { return p.hrep().offsets; })
      .def("is_empty", &Polytope::is_empty)
      .def("contains", [](const Polytope& p, const Vec& x, double tol) { return contains_point(p, x, tol); },
           py::arg("x"), py::arg("tol") = kGeomTol)
      .def("volume", [](const Polytope& p) { return volume(p); })
      .def("support", [](const Polytope& p, const Vec& d) { return support(p, d); })
      .def("to_json", [](const Polytope& p) { return polytope_to_json(p).dump(); });

  m.def("minkowski_sum", &minkowski_sum);
  m.def("pontryagin_diff", &pontryagin_diff);
  m.def("intersect", &intersect);
  m.def("contains_set", &contains_set, py::arg("inner"), py::arg("outer"), py::arg("tol") = kInclusionTol);

  m.def(
      "solve_qp",
      [](const Mat& H, const Vec& f, const Mat& A, const Vec& b) {
        const SolveOutcome s = solve_qp(QPProblem{H, f, A, b, {}, {}, {}, {}});
        return py::dict(py::arg("status") = to_string(s.status), py::arg("x") = s.x,
                        py::arg("objective") = s.objective, py::arg("kkt_residual") = s.kkt_residual);
      },
      py::arg("H"), py::arg("f"), py::arg("A"), py::arg("b"), "min 1/2 x'Hx + f'x subject to A x <= b");
  m.def(
      "lqr",
      [](const Mat& A, const Mat& B, const Mat& Q, const Mat& R) {
        const GainPair g = synthesize_gain(A, B, Q, R);
        return py::make_tuple(g.P, g.K);
      },
      "(P, K) with u = K x");

  py::class_<ExperimentConfig>(m, "Config")
      .def_static("parse", &parse_config, py::arg("text"), py::arg("source") = "<config>")
      .def_static("load", &load_config, py::arg("path"))
      .def("dump", &dump_config)
      .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return same_config(a, b); })
      .def_readwrite("kappa", &ExperimentConfig::kappa)
      .def_readwrite("N", &ExperimentConfig::N)
      .def_readwrite("T_steps", &ExperimentConfig::T_steps)
      .def_readwrite("seeds", &ExperimentConfig::seeds)
      .def_readwrite("x0", &ExperimentConfig::x0)
      .def_property_readonly("modes", [](const ExperimentConfig& c) {
        std::vector<std::string> out;
        for (Mode mode : c.modes) out.emplace_back(to_string(mode));
        return out;
      });

  py::class_<RunTrace>(m, "Trace")
      .def_property_readonly("mode", [](const RunTrace& t) { return std::string(to_string(t.mode)); })
      .def_readonly("seed", &RunTrace::seed)
      .def_property_readonly("status", [](const RunTrace& t) { return std::string(to_string(t.status)); })
      .def_readonly("message", &RunTrace::message)
      .def_readonly("constraint_violations", &RunTrace::constraint_violations)
      .def_property_readonly("states", [](const RunTrace& t) { return stack(t.states); })
      .def_property_readonly("inputs", [](const RunTrace& t) {
        std::vector<Vec> u;
        for (const auto& s : t.steps) u.push_back(s.u);
        return stack(u);
      })
      .def_readonly("cumulative_cost", &RunTrace::cumulative_cost)
      .def("total_cost", &RunTrace::total_cost)
      .def("records", [](const RunTrace& t) {
        std::vector<std::string> out;
        for (const auto& s : t.steps) out.push_back(step_record_json(s));
        return out;
      }, "trace.jsonl lines")
      .def("__len__", [](const RunTrace& t) { return t.steps.size(); });

  m.def(
      "run",
      [](const ExperimentConfig& c, std::uint64_t seed, const std::string& mode) {
        const PlantConfig pc = c.plant_config(seed);
        const Mode md = parse_mode(mode);
        py::gil_scoped_release release;
        return run_closed_loop(pc, md);
      },
      py::arg("config"), py::arg("seed") = 0, py::arg("mode") = "adaptive");
  m.def("write_run", &write_run, py::arg("directory"), py::arg("trace"));
  m.def(
      "check",
      [](const RunTrace& tr, const ExperimentConfig& c) {
        py::list out;
        for (const auto& r : check_invariants(tr, c.plant_config(tr.seed), c.tol))
          out.append(py::dict(py::arg("name") = r.name, py::arg("status") = to_string(r.status),
                              py::arg("worst") = r.worst, py::arg("first_failure") = r.first_failure,
                              py::arg("detail") = r.detail));
        return out;
      },
      py::arg("trace"), py::arg("config"));
}
