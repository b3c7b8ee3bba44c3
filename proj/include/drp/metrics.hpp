#pragma once

#include <string>
#include <vector>

#include "drp/observables.hpp"

namespace drp {

/// Reduced electron density, possibly sub-normalised.
struct ElectronState {
  Matrix4 sigma = Matrix4::Zero();
  double trace_weight = 0.0;
};

/// ST = (T+, T0, T-, S); UD = up/down product basis.
enum class Basis { ST, UD };

std::string to_string(Basis b);
Basis basis_from_string(const std::string& s);

ElectronState reduce_electronic(const Matrix& rho, int nuclear_dim);

/// Von Neumann entropy in bits, eigenvalues in [-1e-10, 0) clipped to 0.
double von_neumann_entropy(const Matrix& rho);

// Every measure renormalises its argument first; zero-trace input gives 0.
double coherence_relative_entropy(const Matrix4& sigma, Basis basis);
double coherence_l1(const Matrix4& sigma, Basis basis);
double coherence_st(const Matrix4& sigma);
double coherence_basis_independent(const Matrix4& sigma);
double concurrence(const Matrix4& sigma);
double log_negativity(const Matrix4& sigma);

enum class MeasureId { Cr, Cl1, Cst, C1, Concurrence, LogNegativity };

/// Names: c_r, c_l1, c_st, c_1, e_c, e_n.
std::string to_string(MeasureId m);
MeasureId measure_from_string(const std::string& s);
/// Whether the measure depends on a basis choice.
bool measure_uses_basis(MeasureId m);

double evaluate_measure(MeasureId m, const Matrix4& sigma, Basis basis = Basis::ST);

/// How sub-normalised states are weighted during time integration.
enum class MeasureWeighting {
  /// Measure of sigma / Tr sigma, integrated with weight Tr sigma.
  RenormalizeThenWeight,
  /// Measure of the raw sigma (no renormalisation), same trace weight.
  WeightOnly,
};

struct MeasureSeries {
  MeasureId measure = MeasureId::Cr;
  Basis basis = Basis::ST;
  std::vector<double> t;
  std::vector<double> values;
  std::vector<double> trace;
};

/// Measure evaluated on each stored reduced state of a trajectory.
MeasureSeries measure_series(const Trajectory& traj, MeasureId m, Basis basis = Basis::ST,
                             MeasureWeighting weighting = MeasureWeighting::RenormalizeThenWeight);

/// Trapezoidal int_0^t_upper value(t) trace(t) dt; the last interval is
/// cut linearly at t_upper.
double time_integrate_measure(const std::vector<double>& t, const std::vector<double>& values,
                              const std::vector<double>& weights, double t_upper = 5.0);
double time_integrate_measure(const MeasureSeries& series, double t_upper = 5.0);

double orientation_average(double c_par, double c_perp);
/// C_perp - C_par.
double orientation_difference(double c_par, double c_perp);

/// l1 coherence of a full electron-nuclear density matrix. The basis choice
/// applies to the electron factor; nuclei stay in the Zeeman basis.
double global_l1(const Matrix& rho, Basis basis, int nuclear_dim);

/// |Y_S| at B = 0 from rho(0) = GC(P_S) / Z, the off-diagonal part of P_S in
/// the eigenbasis of the hyperfine Hamiltonian (degenerate subspaces follow
/// the eigensolver's ordering).
double global_coherent_yield(const SimulationSetup& setup, const RunOptions& opts = {});

/// Time-integrated global l1 coherence along a trajectory with stored full
/// densities.
double integrated_global_l1(const Trajectory& traj, Basis basis, int nuclear_dim,
                            double t_upper = 5.0);

struct TimeIntegratedMeasure {
  double parallel = 0.0;
  double perpendicular = 0.0;
  double average = 0.0;
  double difference = 0.0;
};

/// Time-integrated measure (5 us horizon) for both canonical orientations.
TimeIntegratedMeasure orientation_measure(const SimulationSetup& setup, MeasureId m,
                                          Basis basis = Basis::ST, double t_upper = 5.0,
                                          MeasureWeighting weighting =
                                              MeasureWeighting::RenormalizeThenWeight);

/// Same, for the global l1 coherence of the full density matrix.
TimeIntegratedMeasure orientation_global_l1(const SimulationSetup& setup, Basis basis = Basis::ST,
                                            double t_upper = 5.0);

}  // namespace drp
