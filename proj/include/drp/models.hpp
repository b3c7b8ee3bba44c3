#pragma once

#include <string>
#include <vector>

#include "drp/observables.hpp"

namespace drp {

/// Preset names: one_nitrogen, one_nitrogen_axial_zero_perp, fad_trp_4spin,
/// two_level. The last is a toy descriptor, not a SpinSystem.
std::vector<std::string> preset_names();

/// Spin system for a preset; throws InvalidArgument for unknown names and
/// for two_level.
SpinSystem preset_system(const std::string& name, const PhysicalConstants& c = {});

inline constexpr double kOneNitrogenAPerpMHz = -2.6;
inline constexpr double kOneNitrogenAParMHz = 49.2;

/// Parameters of the A_perp = 0 one-nitrogen sector Hamiltonians, in MHz.
struct BlockHamiltonianParams {
  double a = kOneNitrogenAParMHz / 2.0;  // A_par / 2
  double b = 0.0;                        // omega_0 / sqrt(2)
  double j = 0.0;
  int m_i = 0;

  /// a and b from A_par and a field, omega_0 from the field magnitude.
  static BlockHamiltonianParams from_field(const FieldConfig& field, double j_mhz, int m_i,
                                           double a_par_mhz = kOneNitrogenAParMHz,
                                           const PhysicalConstants& c = {});
  double omega0() const;
};

enum class BlockOrientation { Parallel, Perpendicular };

/// The m_I sector in (T+, T0, T-, S) order, MHz. Exchange enters as -J on
/// the triplets and +J on the singlet, i.e. -2J S_A.S_B shifted by -J/2.
Matrix4 block_hamiltonian(const BlockHamiltonianParams& p, BlockOrientation o);

/// J at which |T+, m_I=-1> meets |S, m_I=0> for the parallel field.
double level_crossing_J(double omega0_mhz, double a_par_mhz);

/// Same crossing found numerically: the m_I = -1 block eigenvalue with the
/// largest T+ weight minus the m_I = 0 eigenvalue with the largest S weight,
/// bracketed on [j_lo, j_hi] and bisected.
double scan_level_crossing(const FieldConfig& field, double j_lo = -40.0, double j_hi = 0.0,
                           double a_par_mhz = kOneNitrogenAParMHz,
                           const PhysicalConstants& c = {});

/// omega_0 / 2 pi in MHz for a field magnitude.
double larmor_mhz(double field_mt, const PhysicalConstants& c = {});

enum class TwoLevelCoupling { Exponential, Linear };

struct TwoLevelToy {
  double b_mhz = 1.4;
  double k = 1.0;         // 1/us
  double delta_d = 2.0;   // Angstrom
  double beta = 1.4;      // 1/Angstrom
  TwoLevelCoupling form = TwoLevelCoupling::Exponential;
};

/// int_0^inf k e^{-kt} |c_2(t)|^2 dt for H = J(t) sigma_z + b sigma_x (MHz,
/// times 2 pi). The initial state is the ground state of J0 sigma_z (down for
/// J0 >= 0); c_2 is the amplitude of the other level. nu_d <= 0 or J0 = 0
/// gives the static problem.
double two_level_efficiency(double j0_mhz, double nu_d_mhz, const TwoLevelToy& toy = {});

enum class AveragingVariant { Full, ZeroPerp, AvgKb, AvgKbAndJ };

std::string to_string(AveragingVariant v);
AveragingVariant averaging_variant_from_string(const std::string& s);

/// Driven one-nitrogen setup for a variant: full keeps A_perp, the others
/// drop it; avg_kb replaces k_b(t) by its period average, avg_kb_and_J also
/// J(t).
SimulationSetup averaging_variant_setup(AveragingVariant v, double j0_mhz, double nu_d_mhz,
                                        double delta_d);

/// The variant with both averages applied, written as an undriven setup with
/// the averaged constants k_b0 <f> and J0 <f>.
SimulationSetup time_averaged_static_setup(double j0_mhz, double nu_d_mhz, double delta_d);

struct AblationPoint {
  double j0_mhz = 0.0;
  double phi_par = 0.0;
  double phi_perp = 0.0;
  double chi = 0.0;
};

/// Yields and chi versus J0 for one averaging variant.
std::vector<AblationPoint> static_vs_time_averaged_run(AveragingVariant v,
                                                       const std::vector<double>& j0_grid,
                                                       double nu_d_mhz = 3.0, double delta_d = 2.0,
                                                       const RunOptions& opts = {}, int workers = 0);

}  // namespace drp
