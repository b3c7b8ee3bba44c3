#include "drp/models.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "drp/parallel.hpp"

namespace drp {

std::vector<std::string> preset_names() {
  return {"one_nitrogen", "one_nitrogen_axial_zero_perp", "fad_trp_4spin", "two_level"};
}

namespace {

Mat3 tensor(std::initializer_list<double> v) {
  Mat3 m;
  auto it = v.begin();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = *it++;
  return m;
}

SpinSystem one_nitrogen(double a_perp_mhz, const PhysicalConstants& c, std::string name) {
  SpinSystem s;
  s.name = std::move(name);
  Nucleus n;
  n.label = "N";
  n.spin = 1.0;
  n.tensor = HyperfineTensor::axial(mhz_to_mt(a_perp_mhz, c), mhz_to_mt(kOneNitrogenAParMHz, c));
  s.radicals[0].push_back(n);
  return s;
}

}  // namespace

SpinSystem preset_system(const std::string& name, const PhysicalConstants& c) {
  if (name == "one_nitrogen") return one_nitrogen(kOneNitrogenAPerpMHz, c, name);
  if (name == "one_nitrogen_axial_zero_perp") return one_nitrogen(0.0, c, name);
  if (name == "fad_trp_4spin") {
    SpinSystem s;
    s.name = name;
    // flavin side
    s.radicals[0].push_back({"N5", 1.0, {tensor({-0.0995, 0.0029, 0.0,
                                                  0.0029, -0.0875, 0.0,
                                                  0.0, 0.0, 1.7569})}});
    s.radicals[0].push_back({"N10", 1.0, {tensor({-0.0149, 0.0021, 0.0,
                                                   0.0021, -0.0237, 0.0,
                                                   0.0, 0.0, 0.6046})}});
    // tryptophan side
    s.radicals[1].push_back({"N1", 1.0, {tensor({-0.0337, 0.0924, -0.1353,
                                                  0.0924, 0.3303, -0.5318,
                                                  -0.1353, -0.5318, 0.6679})}});
    s.radicals[1].push_back({"H1", 0.5, {tensor({-0.9921, -0.2091, -0.2003,
                                                  -0.2091, -0.2631, 0.2803,
                                                  -0.2003, 0.2803, -0.5398})}});
    return s;
  }
  if (name == "two_level") {
    throw InvalidArgument("two_level is a toy model; use two_level_efficiency");
  }
  throw InvalidArgument("unknown preset '" + name + "'");
}

BlockHamiltonianParams BlockHamiltonianParams::from_field(const FieldConfig& field, double j_mhz,
                                                          int m_i, double a_par_mhz,
                                                          const PhysicalConstants& c) {
  if (m_i < -1 || m_i > 1) throw InvalidArgument("m_I must be -1, 0 or 1");
  BlockHamiltonianParams p;
  p.a = a_par_mhz / 2.0;
  p.b = larmor_mhz(field.magnitude_mt, c) / std::sqrt(2.0);
  p.j = j_mhz;
  p.m_i = m_i;
  return p;
}

double BlockHamiltonianParams::omega0() const { return b * std::sqrt(2.0); }

Matrix4 block_hamiltonian(const BlockHamiltonianParams& p, BlockOrientation o) {
  if (p.m_i < -1 || p.m_i > 1) throw InvalidArgument("m_I must be -1, 0 or 1");
  const double am = p.a * p.m_i;
  Matrix4 h = Matrix4::Zero();
  h(1, 1) = -p.j;
  h(3, 3) = p.j;
  h(1, 3) = h(3, 1) = am;
  if (o == BlockOrientation::Parallel) {
    const double w0 = p.omega0();
    h(0, 0) = am + w0 - p.j;
    h(2, 2) = -am - w0 - p.j;
  } else {
    h(0, 0) = am - p.j;
    h(2, 2) = -am - p.j;
    h(0, 1) = h(1, 0) = p.b;
    h(1, 2) = h(2, 1) = p.b;
  }
  return h;
}

double level_crossing_J(double omega0_mhz, double a_par_mhz) {
  return 0.25 * (2.0 * omega0_mhz - a_par_mhz);
}

double scan_level_crossing(const FieldConfig& field, double j_lo, double j_hi, double a_par_mhz,
                           const PhysicalConstants& c) {
  auto level = [&](double j, int m_i, int state) {
    const auto p = BlockHamiltonianParams::from_field(field, j, m_i, a_par_mhz, c);
    Eigen::SelfAdjointEigenSolver<Matrix4> es(block_hamiltonian(p, BlockOrientation::Parallel));
    int best = 0;
    for (int k = 1; k < 4; ++k)
      if (std::norm(es.eigenvectors()(state, k)) > std::norm(es.eigenvectors()(state, best))) best = k;
    return es.eigenvalues()(best);
  };
  auto gap = [&](double j) { return level(j, -1, 0) - level(j, 0, 3); };
  constexpr int kScan = 400;
  double a = j_lo, ga = gap(a);
  for (int i = 1; i <= kScan; ++i) {
    double b = j_lo + (j_hi - j_lo) * i / kScan;
    const double gb = gap(b);
    if ((ga <= 0.0) != (gb <= 0.0)) {
      for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
        const double m = 0.5 * (a + b);
        const double gm = gap(m);
        if ((ga <= 0.0) == (gm <= 0.0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
      return 0.5 * (a + b);
    }
    a = b;
    ga = gb;
  }
  throw ConvergenceError("no level crossing in the scanned J range");
}

double larmor_mhz(double field_mt, const PhysicalConstants& c) { return mt_to_mhz(field_mt, c); }

double two_level_efficiency(double j0_mhz, double nu_d_mhz, const TwoLevelToy& toy) {
  using M2 = Eigen::Matrix2cd;
  M2 sx, sz;
  sx << 0, 1, 1, 0;
  sz << 1, 0, 0, -1;
  const bool driven = nu_d_mhz > 0.0 && j0_mhz != 0.0;
  auto coupling = [&](double t) {
    if (!driven) return j0_mhz;
    const double dx = 0.5 * toy.delta_d * (1.0 - std::cos(kTwoPi * nu_d_mhz * t));
    if (toy.form == TwoLevelCoupling::Linear) {
      return toy.delta_d > 0.0 ? j0_mhz * (1.0 - dx / toy.delta_d) : j0_mhz;
    }
    return j0_mhz * std::exp(-toy.beta * dx);
  };
  // initial level: ground state of J0 sigma_z
  const int first = j0_mhz >= 0.0 ? 1 : 0;
  const int other = 1 - first;

  const double period = driven ? 1.0 / nu_d_mhz : 1.0;
  const double fmax = std::hypot(std::abs(j0_mhz), toy.b_mhz);
  double dt = std::min(period / 400.0, fmax > 0.0 ? 1.0 / (50.0 * fmax) : period);
  const int steps = 2 * static_cast<int>(std::ceil(period / dt / 2.0));
  dt = period / steps;

  M2 p2 = M2::Zero();
  p2(other, other) = 1.0;
  M2 u = M2::Identity();
  M2 q = M2::Zero();
  std::array<double, 3> head{};
  M2 rho0 = M2::Zero();
  rho0(first, first) = 1.0;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    const M2 g = (toy.k * std::exp(-toy.k * t)) * (u.adjoint() * p2 * u);
    q += ((k == 0 || k == steps) ? 0.5 * dt : dt) * g;
    if (k < 3) head[k] = (g * rho0).trace().real();
    if (k < steps) {
      const double tm = t + 0.5 * dt;
      const M2 h = kTwoPi * (coupling(tm) * sz + toy.b_mhz * sx);
      u = M2(-kI * dt * h).exp() * u;
    }
  }
  const Matrix m = std::exp(-0.5 * toy.k * period) * u;
  double eff = geometric_trace_sum(Matrix(q), m, Matrix(rho0));
  eff += dt * dt / 12.0 * (-3.0 * head[0] + 4.0 * head[1] - head[2]) / (2.0 * dt);
  return eff;
}

std::string to_string(AveragingVariant v) {
  switch (v) {
    case AveragingVariant::Full: return "full";
    case AveragingVariant::ZeroPerp: return "zero_perp";
    case AveragingVariant::AvgKb: return "avg_kb";
    case AveragingVariant::AvgKbAndJ: return "avg_kb_and_J";
  }
  return "unknown";
}

AveragingVariant averaging_variant_from_string(const std::string& s) {
  if (s == "full") return AveragingVariant::Full;
  if (s == "zero_perp") return AveragingVariant::ZeroPerp;
  if (s == "avg_kb") return AveragingVariant::AvgKb;
  if (s == "avg_kb_and_J" || s == "avg_kb_and_j") return AveragingVariant::AvgKbAndJ;
  throw InvalidArgument("unknown averaging variant '" + s + "'");
}

SimulationSetup averaging_variant_setup(AveragingVariant v, double j0_mhz, double nu_d_mhz,
                                        double delta_d) {
  SimulationSetup s;
  s.system = preset_system(v == AveragingVariant::Full ? "one_nitrogen"
                                                       : "one_nitrogen_axial_zero_perp");
  s.driving = harmonic_driving(delta_d, nu_d_mhz);
  s.j0_mhz = j0_mhz;
  s.average_rate = v == AveragingVariant::AvgKb || v == AveragingVariant::AvgKbAndJ;
  s.average_coupling = v == AveragingVariant::AvgKbAndJ;
  return s;
}

SimulationSetup time_averaged_static_setup(double j0_mhz, double nu_d_mhz, double delta_d) {
  SimulationSetup s = averaging_variant_setup(AveragingVariant::AvgKbAndJ, j0_mhz, nu_d_mhz, delta_d);
  const double f = time_average_factor(s.rates.beta, delta_d);
  s.driving = static_driving();
  s.average_rate = s.average_coupling = false;
  s.rates.kb0 *= f;
  s.j0_mhz = j0_mhz * f;
  return s;
}

std::vector<AblationPoint> static_vs_time_averaged_run(AveragingVariant v,
                                                       const std::vector<double>& j0_grid,
                                                       double nu_d_mhz, double delta_d,
                                                       const RunOptions& opts, int workers) {
  std::vector<AblationPoint> out(j0_grid.size());
  parallel_for(
      j0_grid.size(),
      [&](std::size_t i) {
        const auto r = compute_chi(averaging_variant_setup(v, j0_grid[i], nu_d_mhz, delta_d), opts);
        out[i] = {j0_grid[i], r.parallel.phi_singlet, r.perpendicular.phi_singlet, r.chi};
      },
      workers);
  return out;
}

}  // namespace drp
