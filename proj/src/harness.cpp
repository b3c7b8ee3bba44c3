#include "drp/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>

#include "drp/parallel.hpp"

namespace drp {

using nlohmann::json;

std::vector<GridPoint> grid_points(const SweepSpec& spec) {
  std::vector<double> taus = spec.tau_us.empty() ? std::vector<double>{0.0} : spec.tau_us;
  std::vector<GridPoint> out;
  out.reserve(spec.size());
  for (double j : spec.j0_mhz)
    for (double nu : spec.nu_d_mhz)
      for (double d : spec.delta_d)
        for (double tau : taus) out.push_back({out.size(), j, nu, d, tau});
  return out;
}

SimulationSetup point_setup(const SimulationSetup& base, const GridPoint& p) {
  SimulationSetup s = base;
  s.j0_mhz = p.j0_mhz;
  if (base.driving.kind == DrivingKind::Piecewise) return s;
  auto& d = s.driving;
  if (p.nu_d_mhz <= 0.0 || p.delta_d <= 0.0) {
    d.kind = DrivingKind::Static;
    d.delta_d = 0.0;
    d.nu_d = 0.0;
    s.average_rate = s.average_coupling = false;
    return s;
  }
  d.delta_d = p.delta_d;
  d.nu_d = p.nu_d_mhz;
  if (p.tau_us > 0.0) {
    d.kind = DrivingKind::Damped;
    d.tau = p.tau_us;
    s.average_rate = s.average_coupling = false;
  } else {
    d.kind = DrivingKind::Harmonic;
  }
  return s;
}

namespace {

enum class ObsKind { Chi, PhiPar, PhiPerp, Gamma, Measure, GlobalL1, GlobalCoherentYield };

struct Observable {
  std::string name;
  ObsKind kind = ObsKind::Chi;
  MeasureId measure = MeasureId::Cr;
  Basis basis = Basis::ST;
};

Observable parse_observable(const std::string& name) {
  if (name == "chi") return {name, ObsKind::Chi};
  if (name == "phi_par") return {name, ObsKind::PhiPar};
  if (name == "phi_perp") return {name, ObsKind::PhiPerp};
  if (name == "gamma") return {name, ObsKind::Gamma};
  if (name == "global_coherent_yield") return {name, ObsKind::GlobalCoherentYield};
  if (name == "global_l1_st") return {name, ObsKind::GlobalL1, MeasureId::Cl1, Basis::ST};
  if (name == "global_l1_ud") return {name, ObsKind::GlobalL1, MeasureId::Cl1, Basis::UD};
  for (auto m : {MeasureId::Cr, MeasureId::Cl1, MeasureId::Cst, MeasureId::C1, MeasureId::Concurrence,
                 MeasureId::LogNegativity}) {
    for (auto b : {Basis::ST, Basis::UD}) {
      const std::string full = measure_uses_basis(m) ? to_string(m) + "_" + to_string(b) : to_string(m);
      if (full == name) return {name, ObsKind::Measure, m, b};
    }
  }
  throw InvalidArgument("unknown observable '" + name + "'");
}

bool expands(ObsKind k) { return k == ObsKind::Measure || k == ObsKind::GlobalL1; }

}  // namespace

std::vector<std::string> observable_columns(const SweepSpec& spec) {
  std::vector<std::string> cols;
  for (const auto& name : spec.observables) {
    const auto o = parse_observable(name);
    if (expands(o.kind)) {
      cols.push_back(name + "_avg");
      cols.push_back(name + "_diff");
    } else {
      cols.push_back(name);
    }
  }
  return cols;
}

RunOptions run_options(const SweepSpec& spec) {
  RunOptions o;
  o.solver = spec.solver;
  o.direct.t_max = spec.t_max;
  return o;
}

RunRecord run_point(const RunConfig& cfg, const GridPoint& p) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.point = p;
  const SweepSpec& spec = cfg.sweep;
  const RunOptions opts = run_options(spec);
  const MeasureWeighting weighting =
      spec.weighting == "raw" ? MeasureWeighting::WeightOnly : MeasureWeighting::RenormalizeThenWeight;
  try {
    const SimulationSetup setup = point_setup(cfg.setup, p);
    std::optional<AnisotropyResult> chi;
    auto note = [&](const YieldResult& y) {
      rec.residual = std::max(rec.residual, std::abs(y.residual));
      rec.converged = rec.converged && y.converged;
      if (rec.solver.empty()) rec.solver = to_string(y.solver);
    };
    auto need_chi = [&]() -> const AnisotropyResult& {
      if (!chi) {
        chi = compute_chi(setup, opts);
        note(chi->parallel);
        note(chi->perpendicular);
      }
      return *chi;
    };
    for (const auto& name : spec.observables) {
      const auto o = parse_observable(name);
      switch (o.kind) {
        case ObsKind::Chi: rec.values.push_back(need_chi().chi); break;
        case ObsKind::PhiPar: rec.values.push_back(need_chi().parallel.phi_singlet); break;
        case ObsKind::PhiPerp: rec.values.push_back(need_chi().perpendicular.phi_singlet); break;
        case ObsKind::Gamma: {
          const auto ys = orientation_map(setup, orientation_grid(spec.orient_level), opts, 1);
          std::vector<double> phis;
          phis.reserve(ys.size());
          for (const auto& y : ys) {
            note(y);
            phis.push_back(y.phi_singlet);
          }
          rec.values.push_back(gamma_anisotropy(phis));
          break;
        }
        case ObsKind::Measure: {
          const auto r = orientation_measure(setup, o.measure, o.basis, spec.measure_t_upper, weighting);
          rec.values.push_back(r.average);
          rec.values.push_back(r.difference);
          break;
        }
        case ObsKind::GlobalL1: {
          const auto r = orientation_global_l1(setup, o.basis, spec.measure_t_upper);
          rec.values.push_back(r.average);
          rec.values.push_back(r.difference);
          break;
        }
        case ObsKind::GlobalCoherentYield:
          rec.values.push_back(global_coherent_yield(setup, opts));
          break;
      }
    }
    if (rec.solver.empty()) rec.solver = "direct";
    for (double v : rec.values)
      if (!std::isfinite(v)) rec.converged = false;
  } catch (const std::exception& e) {
    rec.values.assign(observable_columns(spec).size(), std::numeric_limits<double>::quiet_NaN());
    rec.residual = std::numeric_limits<double>::quiet_NaN();
    rec.solver = "failed";
    rec.converged = false;
    rec.error = e.what();
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<RunRecord> run_sweep(const RunConfig& cfg, int workers) {
  cfg.validate();
  observable_columns(cfg.sweep);
  const auto points = grid_points(cfg.sweep);
  std::vector<RunRecord> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) { out[i] = run_point(cfg, points[i]); }, workers);
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<RunRecord>& records) {
  const bool damped = !spec.tau_us.empty();
  os << "j0_mhz,nu_d_mhz,delta_d_angstrom";
  if (damped) os << ",tau_us";
  for (const auto& c : observable_columns(spec)) os << ',' << c;
  os << ",residual,solver\n";
  for (const auto& r : records) {
    os << format_number(r.point.j0_mhz) << ',' << format_number(r.point.nu_d_mhz) << ','
       << format_number(r.point.delta_d);
    if (damped) os << ',' << format_number(r.point.tau_us);
    for (double v : r.values) os << ',' << format_number(v);
    os << ',' << format_number(r.residual) << ',' << r.solver << '\n';
  }
}

void write_orientation_csv(std::ostream& os, const OrientationGrid& grid,
                           const std::vector<YieldResult>& yields) {
  if (grid.count() != yields.size()) throw InvalidArgument("orientation/yield count mismatch");
  os << "nx,ny,nz,phi_singlet\n";
  for (std::size_t i = 0; i < yields.size(); ++i) {
    const Vec3& n = grid.vertices[i];
    os << format_number(n.x()) << ',' << format_number(n.y()) << ',' << format_number(n.z()) << ','
       << format_number(yields[i].phi_singlet) << '\n';
  }
}

void write_measure_csv(std::ostream& os, const MeasureSeries& s) {
  os << "t_us,value,trace\n";
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    os << format_number(s.t[i]) << ',' << format_number(s.values[i]) << ',' << format_number(s.trace[i])
       << '\n';
  }
}

void write_yield_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t_us,p_singlet,trace\n";
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    os << format_number(traj.t[i]) << ',' << format_number(traj.p_singlet[i]) << ','
       << format_number(traj.trace[i]) << '\n';
  }
}

json sidecar_json(const RunConfig& cfg, const std::string& command) {
  const json c = config_to_json(cfg);
  json meta;
  meta["command"] = command;
  meta["engine_version"] = engine_version();
  meta["config_hash"] = config_hash(c);
  meta["config"] = c;
  const PhysicalConstants& k = cfg.setup.constants;
  meta["constants"] = {{"g_e", k.g_e},
                       {"mu_B", si::kBohrMagneton},
                       {"mu_0", si::kVacuumPermeability},
                       {"h", si::kPlanck},
                       {"gamma_mhz_per_mt", k.gamma_mhz_per_mt()}};
  meta["units"] = {{"time", "us"}, {"distance", "angstrom"}, {"field", "mT"}, {"frequency", "MHz"},
                   {"rates", "1/us"}};
  return meta;
}

void write_sidecar(const std::string& output_path, const json& meta) {
  std::ofstream out(output_path + ".json");
  if (!out) throw InvalidArgument("cannot write '" + output_path + ".json'");
  out << meta.dump(2) << '\n';
}

}  // namespace drp
