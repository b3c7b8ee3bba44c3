#pragma once

#include "drp/spin_core.hpp"
#include "drp/spin_system.hpp"

namespace drp {

namespace si {
inline constexpr double kBohrMagneton = 9.2740100783e-24;  // J/T
inline constexpr double kVacuumPermeability = 1.25663706212e-6;  // N/A^2
inline constexpr double kPlanck = 6.62607015e-34;  // J s
inline constexpr double kHbar = kPlanck / kTwoPi;
}  // namespace si

inline constexpr double kFreeElectronG = 2.00231930436;

struct PhysicalConstants {
  double g_e = kFreeElectronG;

  /// Electron gyromagnetic ratio in MHz per mT (about 28.025).
  double gamma_mhz_per_mt() const { return g_e * si::kBohrMagneton / si::kPlanck * 1e-9; }
};

// Unit conversions. Hamiltonians are in rad/us; this block is the only place
// the gyromagnetic ratio enters.
inline double mhz_to_angular(double mhz) { return kTwoPi * mhz; }
inline double angular_to_mhz(double w) { return w / kTwoPi; }
double mt_to_mhz(double mt, const PhysicalConstants& c = {});
double mhz_to_mt(double mhz, const PhysicalConstants& c = {});
double mt_to_angular(double mt, const PhysicalConstants& c = {});

struct FieldConfig {
  double magnitude_mt = 0.05;
  Vec3 direction = Vec3::UnitZ();

  void validate() const;
};

struct RateModel {
  double kb0 = 2.0;   // 1/us
  double kf = 1.0;    // 1/us
  double beta = 1.4;  // 1/Angstrom

  void validate() const;
};

/// Larmor angular frequency omega_0 = g mu_B B / hbar in rad/us.
double larmor_angular(double field_mt, const PhysicalConstants& c = {});

/// H_Z = omega_0 (S_A + S_B).b for a common electron g-value.
SpinOperator zeeman(const FieldConfig& field, const HilbertLayout& layout,
                    const PhysicalConstants& c = {});

/// sum_ij S_i . A_ij . I_ij with tensors converted from mT.
SpinOperator hyperfine(const SpinSystem& system, const HilbertLayout& layout,
                       const PhysicalConstants& c = {});

/// -2 J S_A.S_B on the electron space, J in MHz, result in rad/us.
Matrix4 exchange_electronic(double j_mhz);
SpinOperator exchange(double j_mhz, const HilbertLayout& layout);

/// Point-dipole coupling D(r) = mu_0 g^2 mu_B^2 / (4 pi hbar r^3) in rad/us.
double dipolar_coupling_angular(double r_angstrom, const PhysicalConstants& c = {});

/// -D [3 (S_A.u)(S_B.u) - S_A.S_B] on the electron space.
Matrix4 eed_electronic(const Vec3& r_angstrom, const PhysicalConstants& c = {});
SpinOperator eed(const Vec3& r_angstrom, const HilbertLayout& layout,
                 const PhysicalConstants& c = {});

/// H - i (k_b/2 P_S + k_f/2 I).
SpinOperator assemble_effective(const SpinOperator& h, const SpinOperator& singlet,
                                double kb, double kf);

}  // namespace drp
