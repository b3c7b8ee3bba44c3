#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "drp/models.hpp"

namespace drp {

enum class ControlObjective {
  /// |Phi_par - Phi_perp|
  Absolute,
  /// chi = |Phi_par - Phi_perp| / max(Phi_par, Phi_perp)
  Relative,
};

std::string to_string(ControlObjective o);
ControlObjective control_objective_from_string(const std::string& s);

/// Piecewise-constant distance control. The displacement r(t) - r0 is set by
/// n_samples amplitudes on an even grid over [0, horizon], interpolated
/// linearly and held constant over each of n_steps propagation steps (value
/// at the step midpoint). Yields are infinite-horizon: after the horizon the
/// last displacement is held.
struct ControlProblem {
  SpinSystem system = preset_system("one_nitrogen");
  FieldConfig field;
  RateModel rates;
  double j0_mhz = 10.0;
  bool include_eed = false;
  double horizon = 10.0;  // us
  int n_steps = 4000;
  int n_samples = 200;
  double lower = 0.0;  // Angstrom
  double upper = 3.0;
  /// Angstrom per us; 3 Angstrom per 15 ns by default.
  double max_slew = 200.0;
  ControlObjective objective = ControlObjective::Relative;
  int max_iterations = 80;
  int restarts = 5;
  std::uint64_t seed = 1;
  double fd_step = 1e-4;  // Angstrom
  int workers = 0;

  void validate() const;
  double sample_time(int j) const;
  double step_length() const { return horizon / n_steps; }
};

/// Per-step displacement from the sample amplitudes.
std::vector<double> step_values(const ControlProblem& p, const std::vector<double>& samples);

/// Clip to the bounds, then enforce |x_{j+1} - x_j| <= max_slew * spacing
/// with a forward and a backward pass.
std::vector<double> project_feasible(const ControlProblem& p, std::vector<double> samples);

/// True when every sample lies within bounds and every neighbour difference
/// within the slew limit (up to 1e-12).
bool is_feasible(const ControlProblem& p, const std::vector<double>& samples);

struct ControlEvaluation {
  double phi_par = 0.0;
  double phi_perp = 0.0;
  double objective = 0.0;
  double chi = 0.0;
};

ControlEvaluation evaluate_control(const ControlProblem& p, const std::vector<double>& samples);

/// |Phi_par - Phi_perp| for the trajectory given by `samples`.
double objective_anisotropy(const ControlProblem& p, const std::vector<double>& samples);

struct IterationRecord {
  int restart = 0;
  int iteration = 0;
  double objective = 0.0;
  /// Best objective over all restarts logged so far.
  double best = 0.0;
  double step_norm = 0.0;
};

struct ControlResult {
  std::vector<double> samples;
  ControlEvaluation value;
  std::vector<IterationRecord> log;
  int best_restart = 0;
  /// "converged" or "budget_exhausted".
  std::string status;

  /// Fraction of propagation steps sitting on a bound.
  double bang_bang_fraction(const ControlProblem& p) const;
};

ControlResult optimize(const ControlProblem& p);

/// CSV `t_us,displacement_angstrom`, one row per step start plus the horizon.
void write_control_csv(std::ostream& os, const ControlProblem& p, const std::vector<double>& samples);

/// JSON log: iteration, restart, objective, best, step_norm per entry.
std::string control_log_json(const ControlProblem& p, const ControlResult& r);

}  // namespace drp
