// Runs the acceptance criteria and prints one PASS/FAIL line each.
// Usage: drp_acceptance [id ...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "drp/control.hpp"
#include "drp/metrics.hpp"
#include "drp/models.hpp"
#include "drp/parallel.hpp"

using namespace drp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Vec3 v(n01(rng), n01(rng), n01(rng));
  return v.normalized();
}

Outcome yield_conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const char* presets[] = {"one_nitrogen", "one_nitrogen_axial_zero_perp", "fad_trp_4spin"};
  double worst = 0.0;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 50; ++i) {
    const int which = i % 5 == 4 ? 2 : i % 2;
    ++counts[which];
    SimulationSetup s;
    s.system = preset_system(presets[which]);
    s.field.direction = random_direction(rng);
    s.j0_mhz = -30.0 + 60.0 * u(rng);
    s.include_eed = u(rng) < 0.5;
    s.rates.kb0 = 0.5 + 3.5 * u(rng);
    s.rates.kf = 0.5 + 1.5 * u(rng);
    // the four-spin runs stay static to fit the time budget
    if (which != 2 && u(rng) < 0.6) {
      s.driving = harmonic_driving(0.5 + 2.5 * u(rng), 1.0 + 9.0 * u(rng),
                                   u(rng) < 0.5 ? DrivingSign::Increase : DrivingSign::Decrease);
    }
    const auto y = compute_yield(s);
    // static and Floquet yields are infinite-horizon; for direct runs the
    // remaining trace bounds both tails
    const double err = std::abs(y.phi_singlet + y.phi_forward - 1.0) - y.trace_remaining;
    worst = std::max(worst, err);
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-5 && t < 120.0,
          fmt("max |Phi_S + Phi_F - 1| = %.2e (tol 1e-5) over %d/%d/%d configs, %.1f s (limit 120 s)", worst,
              counts[0], counts[1], counts[2], t)};
}

Outcome trivial_decay() {
  SimulationSetup s;
  s.field.magnitude_mt = 0.0;
  double worst = 0.0;
  std::string solvers;
  for (Solver solver : {Solver::Auto, Solver::Static, Solver::Direct, Solver::Floquet}) {
    RunOptions o;
    o.solver = solver;
    o.direct.t_max = 30.0;
    const auto y = compute_yield(s, o);
    worst = std::max(worst, std::abs(y.phi_singlet - 2.0 / 3.0));
    solvers += (solvers.empty() ? "" : ",") + to_string(y.solver);
  }
  return {worst <= 1e-8, fmt("max |Phi - 2/3| = %.2e (tol 1e-8), solvers %s", worst, solvers.c_str())};
}

Outcome floquet_direct() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_u = 0.0, worst_p = 0.0;
  for (int i = 0; i < 10; ++i) {
    SimulationSetup s;
    s.system = preset_system("one_nitrogen");
    s.j0_mhz = -30.0 + 60.0 * u(rng);
    s.driving = harmonic_driving(3.0, 1.0 + 9.0 * u(rng));
    const EffectiveHamiltonianSampler sampler(s);
    const auto dec = floquet_decompose(sampler);
    const Stepper stepper(sampler, dec.dt, dec.scheme);
    const double t5 = 5.0 * dec.period;
    worst_u = std::max(worst_u, (floquet_propagator(dec, t5) - propagate_to(stepper, t5)).cwiseAbs().maxCoeff());

    DirectOptions o;
    o.dt = dec.dt;
    o.scheme = dec.scheme;
    o.t_max = std::max(t5, 3.0);
    const auto traj = direct_evolve(sampler, o);
    const Matrix rho0 = sampler.singlet() / sampler.nuclear_dim();
    for (int k = 1; k <= 20; ++k) {
      const std::size_t idx = (traj.t.size() - 1) * k / 20;
      const Matrix uf = floquet_propagator(dec, traj.t[idx]);
      const double pf = (sampler.singlet() * uf * rho0 * uf.adjoint()).trace().real();
      worst_p = std::max(worst_p, std::abs(pf - traj.p_singlet[idx]));
    }
  }
  const double t = seconds_since(t0);
  return {worst_u <= 1e-8 && worst_p <= 1e-7 && t < 300.0,
          fmt("propagator at 5T %.2e (tol 1e-8), p_S %.2e (tol 1e-7), 10 points x 20 times, %.1f s (limit 300 s)",
              worst_u, worst_p, t)};
}

Outcome suppression_recovery() {
  SimulationSetup s;
  s.system = preset_system("one_nitrogen");
  const double chi0 = compute_chi(s).chi;
  s.j0_mhz = 20.0;
  const double chi20 = compute_chi(s).chi;
  std::vector<double> nus;
  for (int i = 0; i <= 36; ++i) nus.push_back(1.0 + 0.25 * i);
  std::vector<double> chis(nus.size());
  parallel_for(nus.size(), [&](std::size_t i) {
    SimulationSetup d = s;
    d.driving = harmonic_driving(3.0, nus[i]);
    chis[i] = compute_chi(d).chi;
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < chis.size(); ++i)
    if (chis[i] > chis[best]) best = i;
  const bool pass = chi20 < chi0 / 10.0 && chis[best] >= 5.0 * chi20;
  return {pass, fmt("chi(J0=0) %.4f, chi(J0=20) %.5f (ratio %.1f, need >10); driven max %.4f at nu %.2f MHz "
                    "= %.0fx static (need >=5)",
                    chi0, chi20, chi0 / chi20, chis[best], nus[best], chis[best] / chi20)};
}

Outcome level_crossing() {
  const FieldConfig f;
  const double scanned = scan_level_crossing(f);
  const double formula = level_crossing_J(larmor_mhz(f.magnitude_mt), kOneNitrogenAParMHz);
  const bool pass = std::abs(scanned - (-11.6)) <= 0.05 && std::abs(scanned - formula) <= 0.05;
  return {pass, fmt("scan %.4f MHz, (2 w0 - A_par)/4 = %.4f MHz, target -11.6 +- 0.05", scanned, formula)};
}

Outcome bessel_identity() {
  double worst = 0.0;
  for (double beta : {0.5, 1.4, 2.0}) {
    for (int k = 0; k <= 12; ++k) {
      const double d = 0.5 * k;
      // trapezoid over a full period of an analytic periodic function
      const int n = 512;
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += std::exp(-beta * 0.5 * d * (1.0 - std::cos(kTwoPi * i / n)));
      worst = std::max(worst, std::abs(sum / n - time_average_factor(beta, d)));
    }
  }
  return {worst <= 1e-9, fmt("max |<f> - I0 form| = %.2e over beta {0.5,1.4,2} x delta 0..6 (tol 1e-9)", worst)};
}

std::vector<std::size_t> peaks(const std::vector<AblationPoint>& curve) {
  double top = 0.0;
  for (const auto& p : curve) top = std::max(top, p.chi);
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    if (curve[i].chi > curve[i - 1].chi && curve[i].chi >= curve[i + 1].chi && curve[i].chi > 0.02 * top)
      out.push_back(i);
  }
  return out;
}

// every peak of `a` lies within one grid cell of some peak of `b`
bool covered(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  for (auto i : a) {
    bool ok = false;
    for (auto j : b) ok = ok || (i > j ? i - j : j - i) <= 1;
    if (!ok) return false;
  }
  return !a.empty();
}

std::string join(const std::vector<std::size_t>& v, const std::vector<double>& grid) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << grid[v[i]];
  return os.str();
}

Outcome averaging_ablation() {
  const double nu = 3.0, delta = 2.0;
  std::vector<double> grid;
  for (int i = 0; i <= 60; ++i) grid.push_back(-30.0 + i);
  const auto full = static_vs_time_averaged_run(AveragingVariant::Full, grid, nu, delta);
  const auto zero = static_vs_time_averaged_run(AveragingVariant::ZeroPerp, grid, nu, delta);
  const auto avg_kb = static_vs_time_averaged_run(AveragingVariant::AvgKb, grid, nu, delta);
  RunOptions floquet;
  floquet.solver = Solver::Floquet;
  const auto both = static_vs_time_averaged_run(AveragingVariant::AvgKbAndJ, grid, nu, delta, floquet);

  RunOptions stat;
  stat.solver = Solver::Static;
  double collapse = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double chi_static = compute_chi(time_averaged_static_setup(grid[i], nu, delta), stat).chi;
    collapse = std::max(collapse, std::abs(both[i].chi - chi_static));
  }
  // avg_kb peaks must sit on peaks of the full run; the full run has extra
  // A_perp structure, so the two-way match is against the A_perp = 0 run
  const auto pz = peaks(zero), pk = peaks(avg_kb), pf = peaks(full);
  const bool in_full = covered(pk, pf);
  const bool same_as_zero = covered(pk, pz) && covered(pz, pk);
  const bool pass = in_full && same_as_zero && collapse < 1e-3;
  return {pass, fmt("avg_kb peaks [%s] MHz; full [%s] (all avg_kb peaks matched: %d); zero_perp [%s] (two-way "
                    "match: %d); avg_kb_and_J max |chi - static| = %.2e (tol 1e-3)",
                    join(pk, grid).c_str(), join(pf, grid).c_str(), in_full, join(pz, grid).c_str(), same_as_zero,
                    collapse)};
}

Outcome metric_exactness() {
  auto ket_bra = [](const Eigen::Vector4cd& v) -> Matrix4 { return v * v.adjoint(); };
  Eigen::Vector4cd singlet = Eigen::Vector4cd::Zero();
  singlet(1) = 1.0 / std::sqrt(2.0);
  singlet(2) = -1.0 / std::sqrt(2.0);
  Eigen::Vector4cd updown = Eigen::Vector4cd::Zero();
  updown(1) = 1.0;
  Eigen::Vector4cd st;
  st << 0.6, cplx(0.0, 0.48), -0.64, 0.0;
  const Eigen::Vector4cd triplet = st_basis_transform() * st.normalized();
  const Eigen::Vector4cd plus = Eigen::Vector4cd::Constant(0.5);

  double exact = 0.0;
  exact = std::max(exact, std::abs(concurrence(ket_bra(singlet)) - 1.0));
  exact = std::max(exact, std::abs(log_negativity(ket_bra(singlet)) - 1.0));
  exact = std::max(exact, std::abs(coherence_relative_entropy(ket_bra(updown), Basis::ST) - 1.0));
  exact = std::max(exact, std::abs(coherence_st(ket_bra(triplet))));
  exact = std::max(exact, std::abs(coherence_basis_independent(ket_bra(plus)) - 2.0));
  exact = std::max(exact, std::abs(coherence_basis_independent(ket_bra(updown)) - 2.0));

  double werner = 0.0;
  for (int k = 0; k <= 20; ++k) {
    const double p = k / 20.0;
    const Matrix4 rho = p * ket_bra(singlet) + (1.0 - p) * Matrix4::Identity() / 4.0;
    const double c = std::max(0.0, (3.0 * p - 1.0) / 2.0);
    werner = std::max(werner, std::abs(concurrence(rho) - c));
    werner = std::max(werner, std::abs(log_negativity(rho) - std::log2(1.0 + c)));
  }
  return {exact <= 1e-10 && werner <= 1e-8,
          fmt("basis-state values max err %.2e (tol 1e-10), Werner max err %.2e (tol 1e-8)", exact, werner)};
}

Outcome eed_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  SimulationSetup s;
  s.system = preset_system("one_nitrogen");
  s.include_eed = true;
  const auto grid = orientation_grid(3);
  auto gamma = [&](const SimulationSetup& x) {
    std::vector<double> phis;
    for (const auto& y : orientation_map(x, grid)) phis.push_back(y.phi_singlet);
    return gamma_anisotropy(phis);
  };
  const double g_static = gamma(s);
  s.driving = harmonic_driving(2.0, 4.4);
  const double g_driven = gamma(s);
  const double t = seconds_since(t0);
  return {g_driven >= 3.0 * g_static && t < 1800.0,
          fmt("Gamma static %.5f, driven %.5f, ratio %.2f (need >=3), %zu orientations, %.1f s", g_static, g_driven,
              g_driven / g_static, grid.count(), t)};
}

Outcome four_spin() {
  const auto t0 = std::chrono::steady_clock::now();
  SimulationSetup base;
  base.system = preset_system("fad_trp_4spin");
  const double reference = compute_chi(base).chi;

  std::vector<double> grid;
  for (int j = -150; j <= 150; j += 10) grid.push_back(j);
  std::vector<double> chis(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    SimulationSetup d = base;
    d.include_eed = true;
    d.j0_mhz = grid[i];
    d.driving = harmonic_driving(2.0, 3.0);
    chis[i] = compute_chi(d).chi;
  });
  std::size_t best = 0;
  int above = 0;
  for (std::size_t i = 0; i < chis.size(); ++i) {
    if (chis[i] > chis[best]) best = i;
    if (chis[i] > reference) ++above;
  }
  const double t = seconds_since(t0);
  return {chis[best] > reference && t < 7200.0,
          fmt("static exchange-only chi(J0=0) %.5f; driven max %.5f at J0 %.0f MHz; %d/%zu grid points above, %.0f s",
              reference, chis[best], grid[best], above, grid.size(), t)};
}

Outcome control() {
  const auto t0 = std::chrono::steady_clock::now();
  ControlProblem p;
  const auto r = optimize(p);
  bool monotone = !r.log.empty();
  for (std::size_t i = 1; i < r.log.size(); ++i) monotone = monotone && r.log[i].best >= r.log[i - 1].best;
  const bool feasible = is_feasible(p, r.samples);
  const double t = seconds_since(t0);
  return {r.value.chi >= 0.5 && feasible && monotone,
          fmt("chi %.4f (need >=0.5), |dPhi| %.4f [%s objective], feasible %d, log monotone %d, status %s, "
              "bang-bang fraction %.2f, %.0f s",
              r.value.chi, std::abs(r.value.phi_par - r.value.phi_perp), to_string(p.objective).c_str(), feasible,
              monotone, r.status.c_str(), r.bang_bang_fraction(p), t)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "yield_conservation", yield_conservation},
      {2, "trivial_decay", trivial_decay},
      {3, "floquet_direct_equivalence", floquet_direct},
      {4, "suppression_and_recovery", suppression_recovery},
      {5, "level_crossing", level_crossing},
      {6, "bessel_time_average", bessel_identity},
      {7, "averaging_ablation", averaging_ablation},
      {8, "metric_exactness", metric_exactness},
      {9, "eed_recovery", eed_recovery},
      {10, "four_spin_driven_vs_static", four_spin},
      {11, "control", control},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %2d %-28s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
