#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "drp/config.hpp"
#include "drp/metrics.hpp"

namespace drp {

struct GridPoint {
  std::size_t index = 0;
  double j0_mhz = 0.0;
  double nu_d_mhz = 0.0;
  double delta_d = 0.0;
  /// Damping time; 0 when undamped.
  double tau_us = 0.0;
};

/// Row-major grid: j0 outermost, then nu_d, delta_d, tau.
std::vector<GridPoint> grid_points(const SweepSpec& spec);

/// Base setup with one grid point applied. nu_d = 0 or delta_d = 0 gives
/// static driving; a piecewise base trajectory is kept as is.
SimulationSetup point_setup(const SimulationSetup& base, const GridPoint& p);

/// Observable columns in output order. Orientation-combined measures expand
/// to `<name>_avg` and `<name>_diff`.
std::vector<std::string> observable_columns(const SweepSpec& spec);

RunOptions run_options(const SweepSpec& spec);

struct RunRecord {
  GridPoint point;
  std::vector<double> values;
  /// Largest |Phi_S + Phi_F + Tr - 1| over the yield runs of this point.
  double residual = 0.0;
  std::string solver;
  bool converged = true;
  std::string error;
  double wall_seconds = 0.0;
};

RunRecord run_point(const RunConfig& cfg, const GridPoint& p);

/// Failures are recorded per point (solver "failed", values NaN).
std::vector<RunRecord> run_sweep(const RunConfig& cfg, int workers = 0);

std::string format_number(double v);

/// Header `j0_mhz,nu_d_mhz,delta_d_angstrom[,tau_us],<observables>,residual,solver`.
void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<RunRecord>& records);

/// Header `nx,ny,nz,phi_singlet`.
void write_orientation_csv(std::ostream& os, const OrientationGrid& grid,
                           const std::vector<YieldResult>& yields);

/// Header `t_us,value,trace`.
void write_measure_csv(std::ostream& os, const MeasureSeries& series);

/// Header `t_us,p_singlet,trace`.
void write_yield_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Metadata shared by every sidecar: config, constants, version, hash.
nlohmann::json sidecar_json(const RunConfig& cfg, const std::string& command);

/// Writes `<path>.json`.
void write_sidecar(const std::string& output_path, const nlohmann::json& meta);

}  // namespace drp
