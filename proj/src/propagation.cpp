#include "drp/propagation.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace drp {

Matrix expm(const Matrix& m) { return m.exp(); }
Matrix4 expm(const Matrix4& m) { return m.exp(); }

double default_time_step(const EffectiveHamiltonianSampler& sampler) {
  double dt = 0.01;
  const double fmax = sampler.frequency_scale_mhz();
  if (fmax > 0.0) dt = std::min(dt, 1.0 / (50.0 * fmax));
  const auto& d = sampler.setup().driving;
  if ((d.kind == DrivingKind::Harmonic || d.kind == DrivingKind::Damped) && d.delta_d > 0.0) {
    dt = std::min(dt, 1.0 / (200.0 * d.nu_d));
  }
  return dt;
}

namespace {

StepScheme resolve(StepScheme s, int dim) {
  if (s != StepScheme::Auto) return s;
  return dim > 64 ? StepScheme::Split : StepScheme::Midpoint;
}

}  // namespace

Stepper::Stepper(const EffectiveHamiltonianSampler& sampler, double dt, StepScheme scheme)
    : sampler_(&sampler), dt_(dt), scheme_(resolve(scheme, sampler.dim())) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
  if (scheme_ == StepScheme::Split) {
    static_step_ = expm(Matrix(-kI * dt_ * sampler.static_hamiltonian()));
  }
}

Matrix Stepper::step(double t0, double h) const {
  Matrix u = Matrix::Identity(sampler_->dim(), sampler_->dim());
  advance(t0, h, u);
  return u;
}

void Stepper::advance(double t0, double h, Matrix& x) const {
  const double tm = t0 + 0.5 * h;
  if (scheme_ == StepScheme::Midpoint) {
    const Matrix u = expm(Matrix(-kI * h * sampler_->effective_without_kf(tm)));
    x = u * x;
    return;
  }
  const Matrix4 half = expm(Matrix4(-kI * (0.5 * h) * sampler_->electronic(tm)));
  const int z = sampler_->nuclear_dim();
  apply_electronic(half, z, x);
  if (h == dt_) {
    x = static_step_ * x;
  } else {
    x = expm(Matrix(-kI * h * sampler_->static_hamiltonian())) * x;
  }
  apply_electronic(half, z, x);
}

SpinOperator step_propagator(const EffectiveHamiltonianSampler& sampler, double t0, double dt,
                             StepScheme scheme) {
  if (!(dt > 0.0)) throw InvalidArgument("step_propagator: dt must be positive");
  Stepper stepper(sampler, dt, scheme);
  return std::exp(-0.5 * sampler.kf() * dt) * stepper.step(t0, dt);
}

Matrix propagate_to(const Stepper& stepper, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("propagate_to: negative time");
  const int n = stepper.sampler().dim();
  Matrix u = Matrix::Identity(n, n);
  const double dt = stepper.dt();
  const auto full = static_cast<long>(std::floor(t / dt * (1.0 + 1e-14)));
  for (long k = 0; k < full; ++k) stepper.advance(k * dt, u);
  const double rest = t - full * dt;
  if (rest > 1e-13 * dt) stepper.advance(full * dt, rest, u);
  return std::exp(-0.5 * stepper.sampler().kf() * t) * u;
}

namespace {

// Tr(P_S rho) for rho on the full space.
double singlet_population(const Matrix& rho, const Matrix4& ps, int z) {
  cplx p = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (ps(a, b) != cplx(0.0)) p += ps(a, b) * rho.block(b * z, a * z, z, z).trace();
  return p.real();
}

// (<S| (x) I) psi, a Z x M block.
Matrix singlet_amplitudes(const Matrix& psi, int z) {
  return (psi.middleRows(z, z) - psi.middleRows(2 * z, z)) / std::sqrt(2.0);
}

}  // namespace

Trajectory direct_evolve(const EffectiveHamiltonianSampler& sampler, const DirectOptions& opts) {
  if (!(opts.t_max > 0.0)) throw InvalidArgument("direct_evolve: t_max must be positive");
  const double dt = opts.dt > 0.0 ? opts.dt : default_time_step(sampler);
  const Stepper stepper(sampler, dt, opts.scheme);
  const int n = sampler.dim();
  const int z = sampler.nuclear_dim();
  const double kf = sampler.kf();
  const Matrix4 ps = electron_singlet_projector();

  Trajectory traj;
  traj.kf = kf;
  traj.dt = dt;
  traj.stored = opts.store;
  traj.mode = opts.mode;
  if (opts.initial_density) traj.mode = StateMode::Density;
  if (traj.mode == StateMode::Auto) traj.mode = n > 64 ? StateMode::Wavefunction : StateMode::Density;
  const bool density = traj.mode == StateMode::Density;

  Matrix state;
  if (density) {
    state = opts.initial_density ? *opts.initial_density : Matrix(sampler.singlet() / z);
    if (state.rows() != n || state.cols() != n) {
      throw DimensionMismatch("direct_evolve: initial density has wrong dimension");
    }
  } else {
    // |S> (x) |m_i>, one column per nuclear configuration.
    state = Matrix::Zero(n, z);
    for (int i = 0; i < z; ++i) {
      state(z + i, i) = 1.0 / std::sqrt(2.0);
      state(2 * z + i, i) = -1.0 / std::sqrt(2.0);
    }
  }

  const auto steps = static_cast<long>(std::ceil(opts.t_max / dt - 1e-9));
  const int stride = std::max(1, opts.store_stride);
  traj.t.reserve(steps + 1);

  for (long k = 0;; ++k) {
    const double t = std::min(k * dt, opts.t_max);
    // the primed state excludes exp(-k_f t/2); populations carry exp(-k_f t)
    const double decay = std::exp(-kf * t);
    double ps_val, tr_val;
    if (density) {
      ps_val = singlet_population(state, ps, z) * decay;
      tr_val = state.trace().real() * decay;
    } else {
      ps_val = singlet_amplitudes(state, z).squaredNorm() / z * decay;
      tr_val = state.squaredNorm() / z * decay;
    }
    traj.t.push_back(t);
    traj.p_singlet.push_back(ps_val);
    traj.trace.push_back(tr_val);
    traj.kb.push_back(sampler.kb(t));
    if (opts.store != StoreStates::None && k % stride == 0) {
      traj.state_t.push_back(t);
      if (opts.store == StoreStates::Electronic) {
        traj.states.push_back(density ? Matrix(trace_out_nuclei(state, z) * decay)
                                      : Matrix(trace_out_nuclei_pure(state, z, decay / z)));
      } else {
        traj.states.push_back(density ? Matrix(state * decay)
                                      : Matrix(state * state.adjoint() * (decay / z)));
      }
    }
    if (k == steps || (opts.trace_cutoff > 0.0 && tr_val < opts.trace_cutoff)) break;
    const double h = std::min(dt, opts.t_max - t);
    if (density) {
      const Matrix u = stepper.step(t, h);
      state = u * state * u.adjoint();
    } else {
      stepper.advance(t, h, state);
    }
  }
  return traj;
}

}  // namespace drp
