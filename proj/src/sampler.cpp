#include "drp/sampler.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace drp {

void SimulationSetup::validate() const {
  system.validate();
  field.validate();
  rates.validate();
  driving.validate();
  if (!std::isfinite(j0_mhz)) throw InvalidArgument("J0 must be finite");
  if ((average_rate || average_coupling) && driving.kind != DrivingKind::Harmonic &&
      driving.kind != DrivingKind::Static) {
    throw InvalidArgument("time-averaged rates require harmonic driving");
  }
  if (include_eed && !(system.displacement.norm() > 0.0)) {
    throw InvalidArgument("dipolar coupling needs a non-zero radical displacement");
  }
}

EffectiveHamiltonianSampler::EffectiveHamiltonianSampler(SimulationSetup setup)
    : setup_(std::move(setup)) {
  setup_.validate();
  layout_ = setup_.system.layout();
  static_ = zeeman(setup_.field, layout_, setup_.constants) +
            hyperfine(setup_.system, layout_, setup_.constants);
  singlet_e_ = electron_singlet_projector();
  singlet_ = embed_electronic(singlet_e_, layout_);
  dot_e_ = exchange_electronic(1.0) / (-2.0 * mhz_to_angular(1.0));
  r0_vec_ = setup_.system.displacement;
  if (setup_.include_eed) setup_.driving.r0 = r0_vec_.norm();
  if (setup_.driving.kind == DrivingKind::Harmonic) {
    // <exp(-beta s (delta/2)(1 - cos))> = exp(-s x) I0(x), s = +1 increase / -1 decrease
    const double x = 0.5 * setup_.rates.beta * setup_.driving.delta_d;
    const double s = setup_.driving.sign == DrivingSign::Increase ? 1.0 : -1.0;
    avg_factor_ = s > 0 ? time_average_factor(setup_.rates.beta, setup_.driving.delta_d)
                        : std::exp(x) * bessel_i0(x);
  }
}

double EffectiveHamiltonianSampler::rate_factor(double dx) const {
  if (setup_.average_rate) return avg_factor_;
  return std::exp(-setup_.rates.beta * dx);
}

double EffectiveHamiltonianSampler::coupling_factor(double dx) const {
  if (setup_.average_coupling) return avg_factor_;
  return std::exp(-setup_.rates.beta * dx);
}

double EffectiveHamiltonianSampler::kb_at_displacement(double dx) const {
  return setup_.rates.kb0 * rate_factor(dx);
}

double EffectiveHamiltonianSampler::kb(double t) const {
  return kb_at_displacement(displacement(t, setup_.driving));
}

double EffectiveHamiltonianSampler::coupling_at_displacement_mhz(double dx) const {
  return setup_.j0_mhz * coupling_factor(dx);
}

double EffectiveHamiltonianSampler::coupling_mhz(double t) const {
  return coupling_at_displacement_mhz(displacement(t, setup_.driving));
}

Matrix4 EffectiveHamiltonianSampler::electronic_at_displacement(double dx) const {
  Matrix4 e = -2.0 * mhz_to_angular(coupling_at_displacement_mhz(dx)) * dot_e_;
  if (setup_.include_eed) {
    const Vec3 axis = setup_.driving.axis ? *setup_.driving.axis : Vec3(r0_vec_.normalized());
    e += eed_electronic(r0_vec_ + dx * axis, setup_.constants);
  }
  e -= kI * (0.5 * kb_at_displacement(dx)) * singlet_e_;
  return e;
}

Matrix4 EffectiveHamiltonianSampler::electronic(double t) const {
  return electronic_at_displacement(displacement(t, setup_.driving));
}

Matrix EffectiveHamiltonianSampler::effective_without_kf(double t) const {
  return static_ + embed_electronic(electronic(t), layout_);
}

Matrix EffectiveHamiltonianSampler::effective(double t) const {
  Matrix h = effective_without_kf(t);
  h.diagonal().array() -= kI * (0.5 * kf());
  return h;
}

Matrix EffectiveHamiltonianSampler::hamiltonian(double t) const {
  const double dx = displacement(t, setup_.driving);
  Matrix4 e = -2.0 * mhz_to_angular(coupling_at_displacement_mhz(dx)) * dot_e_;
  if (setup_.include_eed) {
    const Vec3 axis = setup_.driving.axis ? *setup_.driving.axis : Vec3(r0_vec_.normalized());
    e += eed_electronic(r0_vec_ + dx * axis, setup_.constants);
  }
  return static_ + embed_electronic(e, layout_);
}

bool EffectiveHamiltonianSampler::time_independent() const {
  const auto& d = setup_.driving;
  if (d.kind == DrivingKind::Static) return true;
  if (d.delta_d == 0.0 && d.kind != DrivingKind::Piecewise) return true;
  if (d.kind == DrivingKind::Harmonic && setup_.average_rate && setup_.average_coupling &&
      !setup_.include_eed) {
    return true;
  }
  return false;
}

bool EffectiveHamiltonianSampler::periodic() const {
  return setup_.driving.kind == DrivingKind::Harmonic;
}

double EffectiveHamiltonianSampler::period() const { return setup_.driving.period(); }

double EffectiveHamiltonianSampler::frequency_scale_mhz() const {
  std::vector<double> times = {0.0};
  const auto& d = setup_.driving;
  if (d.kind == DrivingKind::Harmonic || d.kind == DrivingKind::Damped) times.push_back(0.5 / d.nu_d);
  if (d.kind == DrivingKind::Piecewise && !d.knots.empty()) {
    auto by_disp = [](const Knot& a, const Knot& b) { return a.displacement < b.displacement; };
    times.push_back(std::min_element(d.knots.begin(), d.knots.end(), by_disp)->t_us);
    times.push_back(std::max_element(d.knots.begin(), d.knots.end(), by_disp)->t_us);
  }
  double scale = 0.0;
  for (double t : times) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian(t), Eigen::EigenvaluesOnly);
    scale = std::max(scale, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return angular_to_mhz(scale);
}

}  // namespace drp
