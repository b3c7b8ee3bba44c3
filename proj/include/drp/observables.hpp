#pragma once

#include <string>
#include <utility>
#include <vector>

#include "drp/floquet.hpp"

namespace drp {

enum class Solver {
  /// Static for time-independent H_eff, Floquet for periodic driving with
  /// nu_d >= 1 MHz, direct otherwise.
  Auto,
  Direct,
  Floquet,
  Static,
};

std::string to_string(Solver s);
Solver solver_from_string(const std::string& s);

struct YieldResult {
  double phi_singlet = 0.0;
  double phi_forward = 0.0;
  Vec3 orientation = Vec3::UnitZ();
  /// Trace left at the end of a finite-horizon run (0 for infinite horizon).
  double trace_remaining = 0.0;
  /// Bound on the singlet yield missed past t_max: k_b,max Tr(t_max) / k_f.
  double tail_bound = 0.0;
  /// Phi_S + Phi_F + trace_remaining - 1.
  double residual = 0.0;
  Solver solver = Solver::Direct;
  bool converged = true;
  std::string warning;
};

/// Trapezoidal k_b(t) p_S(t) and k_f Tr rho(t) integrals over a trajectory,
/// with the h^2/12 endpoint derivative terms.
YieldResult singlet_yield(const Trajectory& traj);

struct RunOptions {
  Solver solver = Solver::Auto;
  DirectOptions direct;
  FloquetOptions floquet;
};

/// Resolves Auto against the setup.
Solver choose_solver(const EffectiveHamiltonianSampler& sampler, Solver requested);

/// Yields for one setup (field direction as configured).
YieldResult compute_yield(const SimulationSetup& setup, const RunOptions& opts = {});

/// |Phi_par - Phi_perp| / max(Phi_par, Phi_perp); 0 when both vanish.
double relative_anisotropy(double phi_par, double phi_perp);

struct OrientationGrid {
  int level = 0;
  std::vector<Vec3> vertices;
  std::size_t count() const { return vertices.size(); }
};

/// Icosphere by repeated edge-midpoint subdivision: 10 * 4^level + 2 vertices.
OrientationGrid orientation_grid(int level);

/// (Phi_max - Phi_min) / mean over an orientation list.
double gamma_anisotropy(const std::vector<double>& yields);

/// Parallel axis = dominant principal axis of the first hyperfine tensor on
/// radical A, sign fixed so its largest component is positive. Perpendicular
/// = lab x made orthogonal to it (lab y when x is nearly parallel).
std::pair<Vec3, Vec3> canonical_orientations(const SpinSystem& system);

struct AnisotropyResult {
  YieldResult parallel;
  YieldResult perpendicular;
  double chi = 0.0;
};

/// Both canonical orientations, run concurrently when workers allow.
AnisotropyResult compute_chi(const SimulationSetup& setup, const RunOptions& opts = {},
                             int workers = 1);

/// Yields for every grid direction; output order follows the grid.
std::vector<YieldResult> orientation_map(const SimulationSetup& setup, const OrientationGrid& grid,
                                         const RunOptions& opts = {}, int workers = 0);

}  // namespace drp
