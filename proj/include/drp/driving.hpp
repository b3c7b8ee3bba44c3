#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "drp/hamiltonian.hpp"

namespace drp {

enum class DrivingKind { Static, Harmonic, Damped, Piecewise };
enum class DrivingSign { Increase, Decrease };

std::string to_string(DrivingKind kind);
DrivingKind driving_kind_from_string(const std::string& s);

struct Knot {
  double t_us = 0.0;
  double displacement = 0.0;  // r(t) - r0, Angstrom
};

/// Inter-radical distance trajectory r(t).
struct DrivingConfig {
  DrivingKind kind = DrivingKind::Static;
  double delta_d = 0.0;  // oscillation amplitude, Angstrom
  double nu_d = 0.0;     // driving frequency, MHz
  double r0 = 0.0;       // static distance, Angstrom
  /// Displacement direction for the dipolar vector; defaults to the
  /// inter-radical axis when unset.
  std::optional<Vec3> axis;
  DrivingSign sign = DrivingSign::Increase;
  double tau = 0.0;  // damping time, us (damped only)
  std::vector<Knot> knots;  // piecewise only
  /// Slew bound for piecewise knots in Angstrom/us; <= 0 disables the check.
  double max_slew = 0.0;

  void validate() const;
  bool is_periodic() const { return kind == DrivingKind::Harmonic; }
  double period() const;
};

DrivingConfig static_driving();
DrivingConfig harmonic_driving(double delta_d, double nu_d, DrivingSign sign = DrivingSign::Increase);

/// r(t) - r0 in Angstrom.
double displacement(double t, const DrivingConfig& cfg);
/// r(t) in Angstrom.
double distance(double t, const DrivingConfig& cfg);

/// exp(-beta (r(t) - r0)); the single routine behind rate_at and coupling_at.
double distance_factor(double t, const DrivingConfig& cfg, double beta);

double rate_at(double t, const DrivingConfig& cfg, const RateModel& rates);
double coupling_at(double t, const DrivingConfig& cfg, double j0_mhz, double beta);

/// Modified Bessel function of the first kind, order zero.
double bessel_i0(double x);

/// Period average of exp(-beta (r(t) - r0)) for harmonic increase-driving:
/// exp(-beta delta/2) I0(beta delta/2).
double time_average_factor(double beta, double delta_d);

/// r0_vec + (r(t) - r0) axis, with axis defaulting to r0_vec normalised.
Vec3 eed_displacement(double t, const DrivingConfig& cfg, const Vec3& r0_vec);

/// CSV with header `t_us,r_angstrom`.
void write_trajectory_csv(std::ostream& os, const DrivingConfig& cfg,
                          const std::vector<double>& t_grid);
/// Reads `t_us,r_angstrom` rows into piecewise knots relative to the first
/// row's distance, which becomes r0. A `t_us,displacement_angstrom` file is
/// taken as displacements from r0 = 0.
DrivingConfig read_trajectory_csv(std::istream& is);

}  // namespace drp
