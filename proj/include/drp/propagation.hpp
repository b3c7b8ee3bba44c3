#pragma once

#include <optional>
#include <vector>

#include "drp/sampler.hpp"

namespace drp {

enum class StepScheme {
  /// Midpoint for small spaces, Split above 64 dimensions.
  Auto,
  /// exp(-i H_eff(t + dt/2) dt), exact for time-independent H_eff.
  Midpoint,
  /// Symmetric split K(dt/2) exp(-i H_static dt) K(dt/2) with K the
  /// electron-only factor at the midpoint. Second order; one dense product
  /// per step.
  Split,
};

/// Matrix exponential exp(m) via scaling and squaring.
Matrix expm(const Matrix& m);
Matrix4 expm(const Matrix4& m);

/// dt = min(1/(200 nu_d), 1/(50 f_max)), capped at 0.01 us.
double default_time_step(const EffectiveHamiltonianSampler& sampler);

/// Applies one-step propagators of H_eff without the k_f term; the scalar
/// factor exp(-k_f t/2) is restored by callers.
class Stepper {
 public:
  Stepper(const EffectiveHamiltonianSampler& sampler, double dt,
          StepScheme scheme = StepScheme::Auto);

  double dt() const { return dt_; }
  StepScheme scheme() const { return scheme_; }
  const EffectiveHamiltonianSampler& sampler() const { return *sampler_; }

  /// x <- U'(t0 + dt, t0) x.
  void advance(double t0, Matrix& x) const { advance(t0, dt_, x); }
  /// x <- U'(t0 + h, t0) x for an arbitrary step length h.
  void advance(double t0, double h, Matrix& x) const;
  /// Explicit one-step propagator U'(t0 + h, t0).
  Matrix step(double t0, double h) const;

 private:
  const EffectiveHamiltonianSampler* sampler_;
  double dt_;
  StepScheme scheme_;
  Matrix static_step_;  // exp(-i H_static dt), Split only
};

/// One step of the full propagator, including the k_f decay.
SpinOperator step_propagator(const EffectiveHamiltonianSampler& sampler, double t0, double dt,
                             StepScheme scheme = StepScheme::Midpoint);

/// U(t, 0) on the uniform grid of `stepper` (partial final step when t is
/// off-grid), including the k_f decay.
Matrix propagate_to(const Stepper& stepper, double t);

enum class StateMode { Auto, Density, Wavefunction };
enum class StoreStates { None, Electronic, Full };

struct DirectOptions {
  double t_max = 12.5;
  double dt = 0.0;  // 0 selects default_time_step
  StepScheme scheme = StepScheme::Auto;
  /// Auto picks Wavefunction above 64 dimensions.
  StateMode mode = StateMode::Auto;
  StoreStates store = StoreStates::None;
  int store_stride = 1;
  /// Stop early once the trace falls below this value.
  double trace_cutoff = 0.0;
  /// Initial density; defaults to P_S / Z. Forces density mode.
  std::optional<Matrix> initial_density;
};

/// Sampled evolution under H_eff(t). States, when stored, are either the
/// reduced electron density (4x4) or the full density matrix, taken every
/// `store_stride` samples.
struct Trajectory {
  std::vector<double> t;
  std::vector<double> p_singlet;
  std::vector<double> trace;
  std::vector<double> kb;
  double kf = 0.0;
  double dt = 0.0;
  StateMode mode = StateMode::Density;
  StoreStates stored = StoreStates::None;
  std::vector<double> state_t;
  std::vector<Matrix> states;
};

Trajectory direct_evolve(const EffectiveHamiltonianSampler& sampler, const DirectOptions& opts = {});

}  // namespace drp
