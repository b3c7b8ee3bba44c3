#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "drp/control.hpp"
#include "drp/harness.hpp"
#include "drp/validation.hpp"

namespace py = pybind11;
using namespace drp;
using nlohmann::json;

namespace {

// Configs cross the boundary as JSON text; the Python side wraps json.dumps.
RunConfig parse(const std::string& text) {
  RunConfig c = config_from_json(json::parse(text));
  c.validate();
  return c;
}

py::dict yield_dict(const YieldResult& y) {
  py::dict d;
  d["phi_singlet"] = y.phi_singlet;
  d["phi_forward"] = y.phi_forward;
  d["trace_remaining"] = y.trace_remaining;
  d["residual"] = y.residual;
  d["solver"] = to_string(y.solver);
  d["converged"] = y.converged;
  return d;
}

Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> vertex_array(const OrientationGrid& g) {
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> v(g.count(), 3);
  for (std::size_t i = 0; i < g.count(); ++i) v.row(i) = g.vertices[i].transpose();
  return v;
}

}  // namespace

PYBIND11_MODULE(_drp, m) {
  m.doc() = "Driven radical pair spin dynamics";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  m.def("version", &engine_version);
  m.def("presets", &preset_names);
  m.def("default_config_json", [](const std::string& preset) { return config_to_json(default_config(preset)).dump(); });
  m.def("normalize_config_json", [](const std::string& text) { return config_to_json(parse(text)).dump(); });
  m.def("parse_grid", &parse_grid);

  m.def("compute_yield", [](const std::string& cfg) {
    const RunConfig c = parse(cfg);
    py::gil_scoped_release release;
    const auto y = compute_yield(c.setup, run_options(c.sweep));
    py::gil_scoped_acquire acquire;
    return yield_dict(y);
  });

  m.def("compute_chi", [](const std::string& cfg) {
    const RunConfig c = parse(cfg);
    AnisotropyResult r;
    {
      py::gil_scoped_release release;
      r = compute_chi(c.setup, run_options(c.sweep));
    }
    py::dict d;
    d["chi"] = r.chi;
    d["parallel"] = yield_dict(r.parallel);
    d["perpendicular"] = yield_dict(r.perpendicular);
    return d;
  });

  m.def(
      "orientation_map",
      [](const std::string& cfg, int level, int workers) {
        const RunConfig c = parse(cfg);
        const auto grid = orientation_grid(level);
        std::vector<double> phis;
        {
          py::gil_scoped_release release;
          for (const auto& y : orientation_map(c.setup, grid, run_options(c.sweep), workers))
            phis.push_back(y.phi_singlet);
        }
        return py::make_tuple(vertex_array(grid), phis, gamma_anisotropy(phis));
      },
      py::arg("config"), py::arg("level") = 3, py::arg("workers") = 0);

  m.def(
      "sweep_csv",
      [](const std::string& cfg, int workers) {
        const RunConfig c = parse(cfg);
        std::ostringstream os;
        {
          py::gil_scoped_release release;
          write_sweep_csv(os, c.sweep, run_sweep(c, workers));
        }
        return os.str();
      },
      py::arg("config"), py::arg("workers") = 0);

  m.def("time_average_factor", &time_average_factor, py::arg("beta"), py::arg("delta_d"));
  m.def("level_crossing", [](double field_mt) {
    FieldConfig f;
    f.magnitude_mt = field_mt;
    return scan_level_crossing(f);
  }, py::arg("field_mt") = 0.05);
  m.def(
      "two_level_efficiency",
      [](double j0, double nu, double b, double k, double delta, double beta, bool linear) {
        TwoLevelToy t;
        t.b_mhz = b;
        t.k = k;
        t.delta_d = delta;
        t.beta = beta;
        t.form = linear ? TwoLevelCoupling::Linear : TwoLevelCoupling::Exponential;
        return two_level_efficiency(j0, nu, t);
      },
      py::arg("j0_mhz"), py::arg("nu_d_mhz"), py::arg("b_mhz") = 1.4, py::arg("k") = 1.0, py::arg("delta_d") = 2.0,
      py::arg("beta") = 1.4, py::arg("linear") = false);

  // dynamic input: fixed-size vectorised Eigen types do not cross by value
  m.def("measure", [](const std::string& name, const Eigen::MatrixXcd& sigma, const std::string& basis) {
    if (sigma.rows() != 4 || sigma.cols() != 4) throw InvalidArgument("measure: sigma must be 4x4");
    const Matrix4 s = sigma;
    return evaluate_measure(measure_from_string(name), s, basis_from_string(basis));
  }, py::arg("name"), py::arg("sigma"), py::arg("basis") = "st");

  m.def(
      "control_optimize",
      [](double j0, double horizon, int steps, int samples, double lower, double upper, double max_slew,
         const std::string& objective, int iterations, int restarts, std::uint64_t seed) {
        ControlProblem p;
        p.j0_mhz = j0;
        p.horizon = horizon;
        p.n_steps = steps;
        p.n_samples = samples;
        p.lower = lower;
        p.upper = upper;
        p.max_slew = max_slew;
        p.objective = control_objective_from_string(objective);
        p.max_iterations = iterations;
        p.restarts = restarts;
        p.seed = seed;
        ControlResult r;
        {
          py::gil_scoped_release release;
          r = optimize(p);
        }
        py::dict d;
        d["samples"] = r.samples;
        d["steps"] = step_values(p, r.samples);
        d["objective"] = r.value.objective;
        d["chi"] = r.value.chi;
        d["phi_par"] = r.value.phi_par;
        d["phi_perp"] = r.value.phi_perp;
        d["status"] = r.status;
        d["feasible"] = is_feasible(p, r.samples);
        std::vector<double> best;
        for (const auto& e : r.log) best.push_back(e.best);
        d["best_log"] = best;
        return d;
      },
      py::arg("j0_mhz") = 10.0, py::arg("horizon_us") = 10.0, py::arg("n_steps") = 4000, py::arg("n_samples") = 200,
      py::arg("lower") = 0.0, py::arg("upper") = 3.0, py::arg("max_slew") = 200.0, py::arg("objective") = "relative",
      py::arg("iterations") = 80, py::arg("restarts") = 5, py::arg("seed") = 1);

  m.def("validate", [] {
    py::list out;
    for (const auto& c : run_builtin_checks()) {
      py::dict d;
      d["name"] = c.name;
      d["passed"] = c.passed;
      d["value"] = c.value;
      d["expected"] = c.expected;
      d["tolerance"] = c.tolerance;
      out.append(d);
    }
    return out;
  });
}
