#pragma once

#include "drp/driving.hpp"
#include "drp/hamiltonian.hpp"
#include "drp/spin_system.hpp"

namespace drp {

/// Everything needed to build H_eff(t) for one field orientation.
struct SimulationSetup {
  SpinSystem system;
  FieldConfig field;
  RateModel rates;
  DrivingConfig driving;
  double j0_mhz = 0.0;
  bool include_eed = false;
  /// Replace k_b(t) by its period average (harmonic driving only).
  bool average_rate = false;
  /// Replace J(t) by its period average (harmonic driving only).
  bool average_coupling = false;
  PhysicalConstants constants;

  void validate() const;
};

/// Produces H_eff(t) = H(t) - i (k_b(t)/2 P_S + k_f/2 I) on demand.
///
/// H(t) splits into a static part (Zeeman + hyperfine) and an electron-only
/// part (exchange, dipolar and singlet recombination) which is a 4x4 matrix
/// tensored with the nuclear identity. Propagators exploit that split.
class EffectiveHamiltonianSampler {
 public:
  explicit EffectiveHamiltonianSampler(SimulationSetup setup);

  const SimulationSetup& setup() const { return setup_; }
  const HilbertLayout& layout() const { return layout_; }
  int dim() const { return layout_.total_dim(); }
  int nuclear_dim() const { return layout_.nuclear_dim(); }

  /// Zeeman + hyperfine, Hermitian, rad/us.
  const Matrix& static_hamiltonian() const { return static_; }
  const Matrix& singlet() const { return singlet_; }

  /// Electron-only part of H_eff(t) excluding k_f: J(t) exchange + EED(t)
  /// - i k_b(t)/2 P_S.
  Matrix4 electronic(double t) const;
  /// Same, at a given displacement r - r0 (Angstrom).
  Matrix4 electronic_at_displacement(double dx) const;

  double kb(double t) const;
  double kb_at_displacement(double dx) const;
  double coupling_mhz(double t) const;
  double coupling_at_displacement_mhz(double dx) const;
  double kf() const { return setup_.rates.kf; }

  /// Hermitian H(t).
  Matrix hamiltonian(double t) const;
  /// Full non-Hermitian H_eff(t) including the k_f term.
  Matrix effective(double t) const;
  /// H_eff(t) + i k_f/2 I.
  Matrix effective_without_kf(double t) const;

  bool time_independent() const;
  bool periodic() const;
  double period() const;

  /// Largest |eigenvalue| of H(t) over the driving cycle extremes, in MHz.
  double frequency_scale_mhz() const;

 private:
  double rate_factor(double dx) const;
  double coupling_factor(double dx) const;

  SimulationSetup setup_;
  HilbertLayout layout_;
  Matrix static_;
  Matrix singlet_;
  Matrix4 singlet_e_;
  Matrix4 dot_e_;
  Vec3 r0_vec_;
  double avg_factor_ = 1.0;
};

}  // namespace drp
