// drp: driven radical pair simulation CLI.
//
// Exit codes: 0 success, 2 configuration error, 3 non-convergence.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "drp/control.hpp"
#include "drp/harness.hpp"
#include "drp/parallel.hpp"
#include "drp/validation.hpp"

namespace {

using namespace drp;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitConvergence = 3;

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::optional<std::string> preset;
  std::optional<std::string> j0, nud, delta, tau;
  std::optional<double> field_mt;
  std::vector<double> field_dir;
  std::optional<double> kb0, kf, beta;
  std::optional<bool> eed;
  std::optional<std::string> sign;
  std::vector<double> axis;
  std::optional<std::string> trajectory_csv;
  std::optional<bool> avg_rate, avg_coupling;
  std::optional<std::string> solver;
  std::vector<std::string> observe;
  std::optional<int> orient;
  std::optional<double> t_max;
  std::optional<std::string> weighting;
  std::string out;
  std::optional<int> workers;
};

void add_common(CLI::App* app, Common& c, bool sweep_axes = true) {
  app->add_option("--config", c.config, "JSON config file (sections system, field, driving, rates, sweep, output)");
  app->add_option("--preset", c.preset, "System preset (see `drp presets`)");
  if (sweep_axes) {
    app->add_option("--j0", c.j0, "J0 in MHz: value, list a,b,c or start:stop:count");
    app->add_option("--nud", c.nud, "Driving frequency in MHz (grid syntax)");
    app->add_option("--delta", c.delta, "Driving amplitude in Angstrom (grid syntax)");
    app->add_option("--tau", c.tau, "Damping time in us (grid syntax); enables damped driving");
  }
  app->add_option("--field", c.field_mt, "Field magnitude in mT");
  app->add_option("--field-dir", c.field_dir, "Field direction x y z")->expected(3);
  app->add_option("--kb0", c.kb0, "Singlet recombination rate at r0, 1/us");
  app->add_option("--kf", c.kf, "Forward rate, 1/us");
  app->add_option("--beta", c.beta, "Distance attenuation, 1/Angstrom");
  app->add_flag("--eed,!--no-eed", c.eed, "Include electron-electron dipolar coupling");
  app->add_option("--sign", c.sign, "Driving sign: increase or decrease");
  app->add_option("--axis", c.axis, "Driving displacement axis x y z")->expected(3);
  app->add_option("--trajectory-csv", c.trajectory_csv, "Piecewise trajectory (t_us,r_angstrom)");
  app->add_flag("--avg-rate,!--no-avg-rate", c.avg_rate, "Replace k_b(t) by its period average");
  app->add_flag("--avg-coupling,!--no-avg-coupling", c.avg_coupling, "Replace J(t) by its period average");
  app->add_option("--solver", c.solver, "auto, direct, floquet or static");
  app->add_option("--t-max", c.t_max, "Direct-solver horizon in us");
  app->add_option("--out,-o", c.out, "Output file");
  app->add_option("--workers", c.workers, std::string("Worker threads (default: $") + kWorkersEnv + ")");
}

RunConfig build_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? default_config(c.preset.value_or("one_nitrogen")) : load_config(c.config);
  if (c.preset && !c.config.empty()) {
    cfg.preset = *c.preset;
    cfg.setup.system = preset_system(*c.preset);
  }
  auto& s = cfg.setup;
  auto& w = cfg.sweep;
  if (c.j0) w.j0_mhz = parse_grid(*c.j0);
  if (c.nud) w.nu_d_mhz = parse_grid(*c.nud);
  if (c.delta) w.delta_d = parse_grid(*c.delta);
  if (c.tau) w.tau_us = parse_grid(*c.tau);
  if (c.field_mt) s.field.magnitude_mt = *c.field_mt;
  if (!c.field_dir.empty()) {
    const Vec3 d(c.field_dir[0], c.field_dir[1], c.field_dir[2]);
    if (!(d.norm() > 0.0)) throw InvalidArgument("field direction must be non-zero");
    s.field.direction = d.normalized();
  }
  if (c.kb0) s.rates.kb0 = *c.kb0;
  if (c.kf) s.rates.kf = *c.kf;
  if (c.beta) s.rates.beta = *c.beta;
  if (c.eed) s.include_eed = *c.eed;
  if (c.sign) {
    if (*c.sign == "increase") s.driving.sign = DrivingSign::Increase;
    else if (*c.sign == "decrease") s.driving.sign = DrivingSign::Decrease;
    else throw InvalidArgument("--sign must be increase or decrease");
  }
  if (!c.axis.empty()) {
    const Vec3 a(c.axis[0], c.axis[1], c.axis[2]);
    if (!(a.norm() > 0.0)) throw InvalidArgument("driving axis must be non-zero");
    s.driving.axis = a.normalized();
  }
  if (c.trajectory_csv) {
    std::ifstream in(*c.trajectory_csv);
    if (!in) throw InvalidArgument("cannot open '" + *c.trajectory_csv + "'");
    const auto axis = s.driving.axis;
    s.driving = read_trajectory_csv(in);
    s.driving.axis = axis;
  }
  if (c.avg_rate) s.average_rate = *c.avg_rate;
  if (c.avg_coupling) s.average_coupling = *c.avg_coupling;
  if (c.solver) w.solver = solver_from_string(*c.solver);
  if (!c.observe.empty()) w.observables = c.observe;
  if (c.orient) w.orient_level = *c.orient;
  if (c.t_max) w.t_max = *c.t_max;
  if (c.weighting) w.weighting = *c.weighting;
  if (!c.out.empty()) cfg.output.path = c.out;
  cfg.validate();
  return cfg;
}

int workers_of(const Common& c) { return c.workers ? *c.workers : default_workers(); }

GridPoint single_point(const RunConfig& cfg) {
  if (cfg.sweep.size() != 1) throw InvalidArgument("this command takes single values for --j0/--nud/--delta/--tau");
  return grid_points(cfg.sweep).front();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << body;
}

json yield_json(const YieldResult& y) {
  return {{"phi_singlet", y.phi_singlet},
          {"phi_forward", y.phi_forward},
          {"orientation", {y.orientation.x(), y.orientation.y(), y.orientation.z()}},
          {"residual", y.residual},
          {"tail_bound", y.tail_bound},
          {"trace_remaining", y.trace_remaining},
          {"solver", to_string(y.solver)},
          {"converged", y.converged}};
}

// ---- subcommands ----

int cmd_presets(const std::string& show) {
  if (!show.empty()) {
    std::cout << config_to_json(default_config(show)).dump(2) << '\n';
    return 0;
  }
  for (const auto& name : preset_names()) {
    if (name == "two_level") {
      std::cout << name << "\ttoy two-level model (J(t) sigma_z + b sigma_x)\n";
      continue;
    }
    const SpinSystem s = preset_system(name);
    std::cout << name << "\tnuclei " << s.radicals[0].size() << "+" << s.radicals[1].size() << "\tdim "
              << s.layout().total_dim() << '\n';
  }
  return 0;
}

int cmd_simulate(const Common& c, const std::string& orientation, const std::string& trajectory_out,
                 const std::string& yields_out) {
  RunConfig cfg = build_config(c);
  const GridPoint p = single_point(cfg);
  const SimulationSetup setup = point_setup(cfg.setup, p);
  const RunOptions opts = run_options(cfg.sweep);
  json result = {{"j0_mhz", p.j0_mhz}, {"nu_d_mhz", p.nu_d_mhz}, {"delta_d_angstrom", p.delta_d}};
  bool converged = true;
  if (orientation == "both") {
    const auto r = compute_chi(setup, opts, workers_of(c));
    result["parallel"] = yield_json(r.parallel);
    result["perpendicular"] = yield_json(r.perpendicular);
    result["chi"] = r.chi;
    converged = r.parallel.converged && r.perpendicular.converged;
  } else {
    SimulationSetup s = setup;
    if (orientation != "config") {
      const auto axes = canonical_orientations(s.system);
      if (orientation == "parallel") s.field.direction = axes.first;
      else if (orientation == "perpendicular") s.field.direction = axes.second;
      else throw InvalidArgument("--orientation must be both, parallel, perpendicular or config");
    }
    const auto y = compute_yield(s, opts);
    result["yield"] = yield_json(y);
    converged = y.converged;
  }
  std::cout << result.dump(2) << '\n';
  if (!cfg.output.path.empty()) {
    write_file(cfg.output.path, result.dump(2) + "\n");
    write_sidecar(cfg.output.path, sidecar_json(cfg, "simulate"));
  }
  const std::string tpath = trajectory_out.empty() ? cfg.output.trajectory_path : trajectory_out;
  if (!tpath.empty()) {
    std::vector<double> grid(1001);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = cfg.sweep.t_max * i / (grid.size() - 1);
    DrivingConfig d = setup.driving;
    if (setup.include_eed) d.r0 = setup.system.displacement.norm();
    std::ostringstream os;
    write_trajectory_csv(os, d, grid);
    write_file(tpath, os.str());
    write_sidecar(tpath, sidecar_json(cfg, "simulate"));
  }
  if (!yields_out.empty()) {
    SimulationSetup s = setup;
    if (orientation == "parallel" || orientation == "both") s.field.direction = canonical_orientations(s.system).first;
    if (orientation == "perpendicular") s.field.direction = canonical_orientations(s.system).second;
    DirectOptions o = opts.direct;
    const Trajectory traj = direct_evolve(EffectiveHamiltonianSampler(s), o);
    std::ostringstream os;
    write_yield_trajectory_csv(os, traj);
    write_file(yields_out, os.str());
    write_sidecar(yields_out, sidecar_json(cfg, "simulate"));
  }
  if (!converged) throw NonConvergence("yield run did not converge");
  return 0;
}

int cmd_sweep(const Common& c) {
  RunConfig cfg = build_config(c);
  const auto records = run_sweep(cfg, workers_of(c));
  std::ostringstream os;
  write_sweep_csv(os, cfg.sweep, records);
  std::size_t bad = 0;
  for (const auto& r : records) {
    if (!r.converged) {
      ++bad;
      std::cerr << "point " << r.point.index << " (j0=" << r.point.j0_mhz << ", nu_d=" << r.point.nu_d_mhz
                << ", delta=" << r.point.delta_d << ") not converged"
                << (r.error.empty() ? std::string() : ": " + r.error) << '\n';
    }
  }
  if (cfg.output.path.empty()) {
    std::cout << os.str();
  } else {
    write_file(cfg.output.path, os.str());
    json meta = sidecar_json(cfg, "sweep");
    meta["rows"] = records.size();
    meta["columns"] = observable_columns(cfg.sweep);
    meta["non_converged"] = bad;
    write_sidecar(cfg.output.path, meta);
    std::cerr << records.size() << " rows written to " << cfg.output.path << '\n';
  }
  if (bad) throw NonConvergence(std::to_string(bad) + " sweep point(s) not converged");
  return 0;
}

int cmd_anisotropy_map(const Common& c) {
  RunConfig cfg = build_config(c);
  const GridPoint p = single_point(cfg);
  const SimulationSetup setup = point_setup(cfg.setup, p);
  const OrientationGrid grid = orientation_grid(cfg.sweep.orient_level);
  const auto ys = orientation_map(setup, grid, run_options(cfg.sweep), workers_of(c));
  std::vector<double> phis;
  bool converged = true;
  double residual = 0.0;
  for (const auto& y : ys) {
    phis.push_back(y.phi_singlet);
    converged = converged && y.converged;
    residual = std::max(residual, std::abs(y.residual));
  }
  const double gamma = gamma_anisotropy(phis);
  std::ostringstream os;
  write_orientation_csv(os, grid, ys);
  if (cfg.output.path.empty()) {
    std::cout << os.str();
  } else {
    write_file(cfg.output.path, os.str());
    json meta = sidecar_json(cfg, "anisotropy-map");
    meta["orientations"] = grid.count();
    meta["gamma"] = gamma;
    meta["max_residual"] = residual;
    write_sidecar(cfg.output.path, meta);
  }
  std::cerr << "orientations " << grid.count() << "  gamma " << format_number(gamma) << '\n';
  if (!converged) throw NonConvergence("orientation map has non-converged points");
  return 0;
}

int cmd_metrics(const Common& c, const std::string& measure, const std::string& basis,
                const std::string& orientation, double t_upper) {
  RunConfig cfg = build_config(c);
  const GridPoint p = single_point(cfg);
  SimulationSetup setup = point_setup(cfg.setup, p);
  const MeasureId m = measure_from_string(measure);
  const Basis b = basis_from_string(basis);
  const MeasureWeighting weighting =
      cfg.sweep.weighting == "raw" ? MeasureWeighting::WeightOnly : MeasureWeighting::RenormalizeThenWeight;
  const auto axes = canonical_orientations(setup.system);
  if (orientation == "parallel") setup.field.direction = axes.first;
  else if (orientation == "perpendicular") setup.field.direction = axes.second;
  else if (orientation != "config") throw InvalidArgument("--orientation must be parallel, perpendicular or config");
  DirectOptions o;
  o.t_max = t_upper;
  o.store = StoreStates::Electronic;
  const Trajectory traj = direct_evolve(EffectiveHamiltonianSampler(setup), o);
  const MeasureSeries series = measure_series(traj, m, b, weighting);
  const double integral = time_integrate_measure(series, t_upper);
  const auto both = orientation_measure(point_setup(cfg.setup, p), m, b, t_upper, weighting);
  json summary = {{"measure", to_string(m)},
                  {"basis", to_string(b)},
                  {"orientation", orientation},
                  {"t_upper_us", t_upper},
                  {"time_integrated", integral},
                  {"parallel", both.parallel},
                  {"perpendicular", both.perpendicular},
                  {"average", both.average},
                  {"difference", both.difference}};
  std::cout << summary.dump(2) << '\n';
  if (!cfg.output.path.empty()) {
    std::ostringstream os;
    write_measure_csv(os, series);
    write_file(cfg.output.path, os.str());
    json meta = sidecar_json(cfg, "metrics");
    meta["summary"] = summary;
    write_sidecar(cfg.output.path, meta);
  }
  return 0;
}

struct ControlArgs {
  double j0 = 10.0;
  double horizon = 10.0;
  int steps = 4000;
  int samples = 200;
  double lower = 0.0;
  double upper = 3.0;
  double max_slew = 200.0;
  std::string objective = "relative";
  int iterations = 80;
  int restarts = 5;
  std::uint64_t seed = 1;
  std::string log;
};

int cmd_control(const Common& c, const ControlArgs& a) {
  RunConfig cfg = build_config(c);
  ControlProblem p;
  p.system = cfg.setup.system;
  p.field = cfg.setup.field;
  p.rates = cfg.setup.rates;
  p.include_eed = cfg.setup.include_eed;
  p.j0_mhz = a.j0;
  p.horizon = a.horizon;
  p.n_steps = a.steps;
  p.n_samples = a.samples;
  p.lower = a.lower;
  p.upper = a.upper;
  p.max_slew = a.max_slew;
  p.objective = control_objective_from_string(a.objective);
  p.max_iterations = a.iterations;
  p.restarts = a.restarts;
  p.seed = a.seed;
  p.workers = workers_of(c);
  p.validate();
  const ControlResult r = optimize(p);
  json summary = {{"phi_par", r.value.phi_par},     {"phi_perp", r.value.phi_perp},
                  {"objective", r.value.objective}, {"chi", r.value.chi},
                  {"status", r.status},             {"best_restart", r.best_restart},
                  {"bang_bang_fraction", r.bang_bang_fraction(p)}};
  std::cout << summary.dump(2) << '\n';
  if (!cfg.output.path.empty()) {
    std::ostringstream os;
    write_control_csv(os, p, r.samples);
    write_file(cfg.output.path, os.str());
    json meta = sidecar_json(cfg, "control-optimize");
    meta["summary"] = summary;
    meta["objective"] = a.objective;
    write_sidecar(cfg.output.path, meta);
  }
  const std::string log = !a.log.empty() ? a.log : cfg.output.path.empty() ? "" : cfg.output.path + ".log.json";
  if (!log.empty()) write_file(log, control_log_json(p, r) + "\n");
  return 0;
}

int cmd_validate() {
  int failed = 0;
  for (const auto& r : run_builtin_checks()) {
    std::printf("%s %-24s value %.6g expected %.6g tol %.1e%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.value, r.expected, r.tolerance, r.detail.empty() ? "" : "  ", r.detail.c_str());
    failed += r.passed ? 0 : 1;
  }
  if (failed) throw NonConvergence(std::to_string(failed) + " check(s) failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven radical pair simulation engine"};
  app.set_version_flag("--version", drp::engine_version());
  app.require_subcommand(1);

  Common sim_c, sweep_c, map_c, met_c, ctl_c;

  std::string show_preset;
  auto* presets = app.add_subcommand("presets", "List system presets");
  presets->add_option("--show", show_preset, "Print the default config of one preset as JSON");

  std::string sim_orient = "both", sim_traj, sim_yields;
  auto* simulate = app.add_subcommand("simulate", "Yields for one parameter point");
  add_common(simulate, sim_c);
  simulate->add_option("--orientation", sim_orient, "both, parallel, perpendicular or config");
  simulate->add_option("--trajectory", sim_traj, "Write the distance trajectory (t_us,r_angstrom)");
  simulate->add_option("--yields", sim_yields, "Write p_singlet and trace over time");

  auto* sweep = app.add_subcommand("sweep", "Parameter grid sweep to CSV");
  add_common(sweep, sweep_c);
  sweep->add_option("--observe", sweep_c.observe, "Observables per point (chi, gamma, c_r_st, ...)")->delimiter(',');
  sweep->add_option("--orient-grid", sweep_c.orient, "Icosphere level for gamma");
  sweep->add_option("--weighting", sweep_c.weighting, "Measure weighting: renormalize or raw");

  auto* amap = app.add_subcommand("anisotropy-map", "Singlet yield over an orientation grid");
  add_common(amap, map_c);
  amap->add_option("--orient-grid", map_c.orient, "Icosphere level (4 gives 2562 orientations)");

  std::string met_measure = "c_r", met_basis = "st", met_orient = "perpendicular";
  double met_t = 5.0;
  auto* metrics = app.add_subcommand("metrics", "Coherence or entanglement measure over time");
  add_common(metrics, met_c);
  metrics->add_option("--measure", met_measure, "c_r, c_l1, c_st, c_1, e_c or e_n");
  metrics->add_option("--basis", met_basis, "st or ud");
  metrics->add_option("--orientation", met_orient, "parallel, perpendicular or config");
  metrics->add_option("--t-upper", met_t, "Integration horizon in us");
  metrics->add_option("--weighting", met_c.weighting, "renormalize or raw");

  ControlArgs ctl;
  auto* control = app.add_subcommand("control-optimize", "Optimise a bounded distance trajectory");
  add_common(control, ctl_c, false);
  control->add_option("--j0", ctl.j0, "J0 in MHz");
  control->add_option("--horizon", ctl.horizon, "Control horizon in us");
  control->add_option("--steps", ctl.steps, "Propagation steps");
  control->add_option("--samples", ctl.samples, "Control amplitudes");
  control->add_option("--lower", ctl.lower, "Lower displacement bound, Angstrom");
  control->add_option("--upper", ctl.upper, "Upper displacement bound, Angstrom");
  control->add_option("--max-slew", ctl.max_slew, "Slew limit in Angstrom/us (0 disables)");
  control->add_option("--objective", ctl.objective, "absolute or relative");
  control->add_option("--iterations", ctl.iterations, "Iterations per restart");
  control->add_option("--restarts", ctl.restarts, "Random restarts");
  control->add_option("--seed", ctl.seed, "Random seed");
  control->add_option("--log", ctl.log, "Iteration log JSON path");

  auto* validate = app.add_subcommand("validate", "Run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*presets) return cmd_presets(show_preset);
    if (*simulate) return cmd_simulate(sim_c, sim_orient, sim_traj, sim_yields);
    if (*sweep) return cmd_sweep(sweep_c);
    if (*amap) return cmd_anisotropy_map(map_c);
    if (*metrics) return cmd_metrics(met_c, met_measure, met_basis, met_orient, met_t);
    if (*control) return cmd_control(ctl_c, ctl);
    if (*validate) return cmd_validate();
  } catch (const drp::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const drp::DimensionMismatch& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const drp::ConvergenceError& e) {
    std::cerr << "not converged: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const NonConvergence& e) {
    std::cerr << "not converged: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
