#pragma once

#include <array>
#include <memory>
#include <vector>

#include "drp/propagation.hpp"

namespace drp {

struct FloquetOptions {
  /// 0 selects ceil(T / default_time_step), rounded up to an even count.
  int steps_per_period = 0;
  StepScheme scheme = StepScheme::Auto;
  /// Keep U'(t) every `sample_stride` steps for reconstruction; 0 picks a
  /// stride giving at most 64 stored samples.
  int sample_stride = 0;
  /// Accumulate the one-period yield integrals during the sweep.
  bool accumulate_yields = true;
  /// Period to use when the sampler is time independent.
  double period = 0.0;
  /// Eigenbases with condition estimate above this are rejected.
  double condition_threshold = 1e8;
  /// On rejection fall back to repeated squaring instead of throwing.
  bool fallback = true;
};

/// One-period propagator eigendata. The k_f decay is factored out:
/// U(t) = exp(-k_f t/2) U'(t), and U'(T) = V diag(multipliers) V^-1.
struct FloquetDecomposition {
  double period = 0.0;
  double kf = 0.0;
  int steps_per_period = 0;
  double dt = 0.0;
  Matrix one_period;
  bool diagonalized = false;
  Matrix modes;           // V = phi(0)
  Matrix modes_inverse;   // V^-1
  Vector multipliers;     // eigenvalues of U'(T)
  Vector quasienergies;   // E with exp(-i E T) = multipliers * exp(-k_f T/2)
  double condition_estimate = 0.0;
  int sample_stride = 1;
  std::vector<Matrix> samples;  // U'(k * sample_stride * dt)
  /// Trapezoid-weighted one-period integrals of k_b(t) e^{-k_f t} U'^dag P_S U'
  /// and k_f e^{-k_f t} U'^dag U'.
  Matrix singlet_integral;
  Matrix forward_integral;
  /// Integrand operators at t = 0, dt, 2dt (endpoint correction).
  std::array<Matrix, 4> singlet_head;
  std::array<Matrix, 4> forward_head;
  std::shared_ptr<const EffectiveHamiltonianSampler> sampler;
  StepScheme scheme = StepScheme::Auto;

  /// Floquet modes phi(t) at stored sample k (diagonalized case only).
  Matrix phi(int k) const;
};

FloquetDecomposition floquet_decompose(const EffectiveHamiltonianSampler& sampler,
                                       const FloquetOptions& opts = {});

/// U'(T)^n by the eigendecomposition, or by repeated squaring.
Matrix one_period_power(const FloquetDecomposition& dec, long n);

/// U(t, 0) = phi(t) e^{-iEt} V^-1, evaluated as U'(t mod T) U'(T)^n with the
/// within-period part refined from the nearest stored sample.
Matrix floquet_propagator(const FloquetDecomposition& dec, double t);

struct ChannelYields {
  double singlet = 0.0;
  double forward = 0.0;
};

/// Infinite-horizon yields from the one-period integrals.
ChannelYields floquet_yields(const FloquetDecomposition& dec, const Matrix& rho0);

/// Exact infinite-horizon yields for a time-independent H_eff.
ChannelYields static_yields(const EffectiveHamiltonianSampler& sampler, const Matrix& rho0);

/// Sum_n over Tr[Q (M^n rho M^n^dag)] evaluated by doubling; used when the
/// one-period propagator is not safely diagonalisable.
double geometric_trace_sum(const Matrix& q, const Matrix& m, const Matrix& rho0);

}  // namespace drp
