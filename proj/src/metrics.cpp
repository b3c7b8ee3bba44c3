#include "drp/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "drp/parallel.hpp"

namespace drp {

std::string to_string(Basis b) { return b == Basis::ST ? "st" : "ud"; }

Basis basis_from_string(const std::string& s) {
  if (s == "st" || s == "ST") return Basis::ST;
  if (s == "ud" || s == "UD") return Basis::UD;
  throw InvalidArgument("unknown basis '" + s + "' (expected st or ud)");
}

ElectronState reduce_electronic(const Matrix& rho, int nuclear_dim) {
  ElectronState out;
  out.sigma = trace_out_nuclei(rho, nuclear_dim);
  out.trace_weight = out.sigma.trace().real();
  return out;
}

double von_neumann_entropy(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()(i);
    if (l > 0.0) s -= l * std::log2(l);
  }
  return s;
}

namespace {

// sigma / Tr sigma, or nullopt-like zero flag for vanishing trace.
bool normalized(const Matrix4& sigma, Matrix4& out) {
  const double tr = sigma.trace().real();
  if (!(std::abs(tr) > 1e-300)) return false;
  out = sigma / tr;
  return true;
}

Matrix4 in_basis(const Matrix4& sigma, Basis basis) {
  if (basis == Basis::UD) return sigma;
  const Matrix4 u = st_basis_transform();
  return u.adjoint() * sigma * u;
}

Matrix4 dephased(const Matrix4& s) {
  return Matrix4(s.diagonal().asDiagonal());
}

double entropy4(const Matrix4& s) { return von_neumann_entropy(Matrix(s)); }

}  // namespace

double coherence_relative_entropy(const Matrix4& sigma, Basis basis) {
  Matrix4 s;
  if (!normalized(sigma, s)) return 0.0;
  const Matrix4 b = in_basis(s, basis);
  return std::max(0.0, entropy4(dephased(b)) - entropy4(b));
}

double coherence_l1(const Matrix4& sigma, Basis basis) {
  Matrix4 s;
  if (!normalized(sigma, s)) return 0.0;
  const Matrix4 b = in_basis(s, basis);
  return b.cwiseAbs().sum() - b.diagonal().cwiseAbs().sum();
}

double coherence_st(const Matrix4& sigma) {
  Matrix4 s;
  if (!normalized(sigma, s)) return 0.0;
  // P_S s P_S + P_T s P_T drops the S-T coherences (row/column 3 in ST order)
  Matrix4 b = in_basis(s, Basis::ST);
  Matrix4 blocked = b;
  for (int i = 0; i < 3; ++i) {
    blocked(i, 3) = 0.0;
    blocked(3, i) = 0.0;
  }
  return std::max(0.0, entropy4(blocked) - entropy4(b));
}

double coherence_basis_independent(const Matrix4& sigma) {
  Matrix4 s;
  if (!normalized(sigma, s)) return 0.0;
  return std::max(0.0, 2.0 - entropy4(s));
}

double concurrence(const Matrix4& sigma) {
  Matrix4 s;
  if (!normalized(sigma, s)) return 0.0;
  s = 0.5 * (s + s.adjoint());
  Matrix4 yy = Matrix4::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Matrix4 tilde = yy * s.conjugate() * yy;
  Eigen::SelfAdjointEigenSolver<Matrix4> es(s);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix4 root = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  const Matrix4 r = root * tilde * root;
  Eigen::SelfAdjointEigenSolver<Matrix4> er(0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
  Eigen::Vector4d l = er.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  std::sort(l.data(), l.data() + 4, std::greater<>());
  return std::max(0.0, l(0) - l(1) - l(2) - l(3));
}

double log_negativity(const Matrix4& sigma) {
  Matrix4 s;
  if (!normalized(sigma, s)) return 0.0;
  // partial transpose on A: index 2a + b, (a b),(a' b') -> (a' b),(a b')
  Matrix4 pt;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 2; ++b2) pt(2 * a + b, 2 * a2 + b2) = s(2 * a2 + b, 2 * a + b2);
  Eigen::SelfAdjointEigenSolver<Matrix4> es(0.5 * (pt + pt.adjoint()), Eigen::EigenvaluesOnly);
  const double norm = es.eigenvalues().cwiseAbs().sum();
  return std::max(0.0, std::log2(norm));
}

std::string to_string(MeasureId m) {
  switch (m) {
    case MeasureId::Cr: return "c_r";
    case MeasureId::Cl1: return "c_l1";
    case MeasureId::Cst: return "c_st";
    case MeasureId::C1: return "c_1";
    case MeasureId::Concurrence: return "e_c";
    case MeasureId::LogNegativity: return "e_n";
  }
  return "unknown";
}

MeasureId measure_from_string(const std::string& s) {
  if (s == "c_r") return MeasureId::Cr;
  if (s == "c_l1") return MeasureId::Cl1;
  if (s == "c_st") return MeasureId::Cst;
  if (s == "c_1") return MeasureId::C1;
  if (s == "e_c") return MeasureId::Concurrence;
  if (s == "e_n") return MeasureId::LogNegativity;
  throw InvalidArgument("unknown measure '" + s + "' (expected c_r, c_l1, c_st, c_1, e_c or e_n)");
}

bool measure_uses_basis(MeasureId m) { return m == MeasureId::Cr || m == MeasureId::Cl1; }

double evaluate_measure(MeasureId m, const Matrix4& sigma, Basis basis) {
  switch (m) {
    case MeasureId::Cr: return coherence_relative_entropy(sigma, basis);
    case MeasureId::Cl1: return coherence_l1(sigma, basis);
    case MeasureId::Cst: return coherence_st(sigma);
    case MeasureId::C1: return coherence_basis_independent(sigma);
    case MeasureId::Concurrence: return concurrence(sigma);
    case MeasureId::LogNegativity: return log_negativity(sigma);
  }
  return 0.0;
}

namespace {

// Raw-state variant: the measure formula applied to sigma without dividing
// by its trace. Entropies use the unnormalised spectrum.
double evaluate_raw(MeasureId m, const Matrix4& sigma, Basis basis) {
  const double tr = sigma.trace().real();
  if (!(tr > 1e-300)) return 0.0;
  switch (m) {
    case MeasureId::Cl1:
      return tr * coherence_l1(sigma, basis);
    case MeasureId::Concurrence:
      return tr * concurrence(sigma);
    case MeasureId::Cr: {
      const Matrix4 b = in_basis(sigma, basis);
      return std::max(0.0, entropy4(dephased(b)) - entropy4(b));
    }
    case MeasureId::Cst: {
      Matrix4 b = in_basis(sigma, Basis::ST);
      Matrix4 blocked = b;
      for (int i = 0; i < 3; ++i) blocked(i, 3) = blocked(3, i) = 0.0;
      return std::max(0.0, entropy4(blocked) - entropy4(b));
    }
    case MeasureId::C1:
      return std::max(0.0, 2.0 * tr - entropy4(sigma));
    case MeasureId::LogNegativity:
      return std::max(0.0, std::log2(tr) + log_negativity(sigma));
  }
  return 0.0;
}

}  // namespace

MeasureSeries measure_series(const Trajectory& traj, MeasureId m, Basis basis,
                             MeasureWeighting weighting) {
  if (traj.stored == StoreStates::None) {
    throw InvalidArgument("measure_series: trajectory has no stored states");
  }
  MeasureSeries out;
  out.measure = m;
  out.basis = basis;
  const std::size_t n = traj.states.size();
  out.t = traj.state_t;
  out.values.resize(n);
  out.trace.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    Matrix4 sigma;
    if (traj.stored == StoreStates::Electronic) {
      sigma = traj.states[k];
    } else {
      sigma = trace_out_nuclei(traj.states[k], static_cast<int>(traj.states[k].rows() / 4));
    }
    out.trace[k] = sigma.trace().real();
    if (weighting == MeasureWeighting::RenormalizeThenWeight) {
      out.values[k] = evaluate_measure(m, sigma, basis);
    } else {
      out.values[k] = evaluate_raw(m, sigma, basis);
    }
  }
  return out;
}

double time_integrate_measure(const std::vector<double>& t, const std::vector<double>& values,
                              const std::vector<double>& weights, double t_upper) {
  if (t.size() != values.size() || t.size() != weights.size()) {
    throw DimensionMismatch("time_integrate_measure: grid mismatch");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    if (t[k] >= t_upper) break;
    const double f0 = values[k] * weights[k];
    double f1 = values[k + 1] * weights[k + 1];
    double t1 = t[k + 1];
    if (t1 > t_upper) {
      const double w = (t_upper - t[k]) / (t1 - t[k]);
      f1 = f0 + w * (f1 - f0);
      t1 = t_upper;
    }
    sum += 0.5 * (t1 - t[k]) * (f0 + f1);
  }
  return sum;
}

double time_integrate_measure(const MeasureSeries& series, double t_upper) {
  return time_integrate_measure(series.t, series.values, series.trace, t_upper);
}

double orientation_average(double c_par, double c_perp) { return 0.5 * (c_par + c_perp); }
double orientation_difference(double c_par, double c_perp) { return c_perp - c_par; }

double global_l1(const Matrix& rho, Basis basis, int nuclear_dim) {
  const double tr = rho.trace().real();
  if (!(std::abs(tr) > 1e-300)) return 0.0;
  Matrix r = rho / tr;
  if (basis == Basis::ST) {
    const int z = nuclear_dim;
    HilbertLayout flat({z}, {});
    const Matrix u = embed_electronic(st_basis_transform(), flat);
    r = u.adjoint() * r * u;
  }
  return r.cwiseAbs().sum() - r.diagonal().cwiseAbs().sum();
}

double integrated_global_l1(const Trajectory& traj, Basis basis, int nuclear_dim, double t_upper) {
  if (traj.stored != StoreStates::Full) {
    throw InvalidArgument("integrated_global_l1: trajectory must store full densities");
  }
  std::vector<double> values(traj.states.size()), weights(traj.states.size());
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    weights[k] = traj.states[k].trace().real();
    values[k] = global_l1(traj.states[k], basis, nuclear_dim);
  }
  return time_integrate_measure(traj.state_t, values, weights, t_upper);
}

double global_coherent_yield(const SimulationSetup& setup, const RunOptions& opts) {
  SimulationSetup s = setup;
  s.field.magnitude_mt = 0.0;
  const HilbertLayout layout = s.system.layout();
  const Matrix hf = hyperfine(s.system, layout, s.constants);
  Eigen::SelfAdjointEigenSolver<Matrix> es(hf);
  const Matrix& w = es.eigenvectors();
  const Matrix ps = singlet_projector(layout);
  Matrix p = w.adjoint() * ps * w;
  p.diagonal().setZero();
  RunOptions o = opts;
  o.direct.initial_density = Matrix(w * p * w.adjoint() / layout.nuclear_dim());
  return std::abs(compute_yield(s, o).phi_singlet);
}

namespace {

Trajectory measure_trajectory(const SimulationSetup& setup, const Vec3& dir, double t_upper,
                              StoreStates store) {
  SimulationSetup s = setup;
  s.field.direction = dir;
  const EffectiveHamiltonianSampler sampler(s);
  DirectOptions o;
  o.t_max = t_upper;
  o.store = store;
  if (store == StoreStates::Full) o.mode = StateMode::Density;
  return direct_evolve(sampler, o);
}

}  // namespace

TimeIntegratedMeasure orientation_measure(const SimulationSetup& setup, MeasureId m, Basis basis,
                                          double t_upper, MeasureWeighting weighting) {
  const auto [par, perp] = canonical_orientations(setup.system);
  TimeIntegratedMeasure out;
  const auto tp = measure_trajectory(setup, par, t_upper, StoreStates::Electronic);
  const auto tq = measure_trajectory(setup, perp, t_upper, StoreStates::Electronic);
  out.parallel = time_integrate_measure(measure_series(tp, m, basis, weighting), t_upper);
  out.perpendicular = time_integrate_measure(measure_series(tq, m, basis, weighting), t_upper);
  out.average = orientation_average(out.parallel, out.perpendicular);
  out.difference = orientation_difference(out.parallel, out.perpendicular);
  return out;
}

TimeIntegratedMeasure orientation_global_l1(const SimulationSetup& setup, Basis basis,
                                            double t_upper) {
  const auto [par, perp] = canonical_orientations(setup.system);
  const int z = setup.system.layout().nuclear_dim();
  TimeIntegratedMeasure out;
  out.parallel = integrated_global_l1(measure_trajectory(setup, par, t_upper, StoreStates::Full),
                                      basis, z, t_upper);
  out.perpendicular = integrated_global_l1(
      measure_trajectory(setup, perp, t_upper, StoreStates::Full), basis, z, t_upper);
  out.average = orientation_average(out.parallel, out.perpendicular);
  out.difference = orientation_difference(out.parallel, out.perpendicular);
  return out;
}

}  // namespace drp
