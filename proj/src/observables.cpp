#include "drp/observables.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "drp/parallel.hpp"

namespace drp {

std::string to_string(Solver s) {
  switch (s) {
    case Solver::Auto: return "auto";
    case Solver::Direct: return "direct";
    case Solver::Floquet: return "floquet";
    case Solver::Static: return "static";
  }
  return "unknown";
}

Solver solver_from_string(const std::string& s) {
  if (s == "auto") return Solver::Auto;
  if (s == "direct") return Solver::Direct;
  if (s == "floquet") return Solver::Floquet;
  if (s == "static") return Solver::Static;
  throw InvalidArgument("unknown solver '" + s + "' (expected auto, direct, floquet or static)");
}

namespace {

// int_0^T f by trapezoid plus -h^2/12 (f'(T) - f'(0)) with one-sided
// four-point slopes; an end term is skipped when its steps are uneven.
double corrected_trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  const std::size_t n = t.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) sum += 0.5 * (t[k + 1] - t[k]) * (f[k] + f[k + 1]);
  if (n < 4) return sum;
  auto even = [&](std::size_t a, double h) {
    for (std::size_t k = a; k < a + 3; ++k)
      if (std::abs((t[k + 1] - t[k]) - h) > 1e-9 * h) return false;
    return true;
  };
  const double h0 = t[1] - t[0];
  if (even(0, h0)) {
    const double s0 = (-11.0 * f[0] + 18.0 * f[1] - 9.0 * f[2] + 2.0 * f[3]) / (6.0 * h0);
    sum += h0 * h0 / 12.0 * s0;
  }
  const double h1 = t[n - 1] - t[n - 2];
  if (even(n - 4, h1)) {
    const double s1 = (11.0 * f[n - 1] - 18.0 * f[n - 2] + 9.0 * f[n - 3] - 2.0 * f[n - 4]) / (6.0 * h1);
    sum -= h1 * h1 / 12.0 * s1;
  }
  return sum;
}

}  // namespace

YieldResult singlet_yield(const Trajectory& traj) {
  const std::size_t n = traj.t.size();
  if (n == 0) throw InvalidArgument("singlet_yield: empty trajectory");
  std::vector<double> fs(n), ff(n);
  double kb_max = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    fs[k] = traj.kb[k] * traj.p_singlet[k];
    ff[k] = traj.kf * traj.trace[k];
    kb_max = std::max(kb_max, traj.kb[k]);
  }
  YieldResult y;
  y.phi_singlet = corrected_trapezoid(traj.t, fs);
  y.phi_forward = corrected_trapezoid(traj.t, ff);
  y.trace_remaining = traj.trace.back();
  y.tail_bound = traj.kf > 0.0 ? kb_max * y.trace_remaining / traj.kf : kb_max * y.trace_remaining;
  y.residual = y.phi_singlet + y.phi_forward + y.trace_remaining - 1.0;
  y.solver = Solver::Direct;
  if (y.trace_remaining > 1e-4) {
    y.converged = false;
    y.warning = "trace " + std::to_string(y.trace_remaining) +
                " remains at t_max; singlet tail bounded by " + std::to_string(y.tail_bound);
  }
  return y;
}

Solver choose_solver(const EffectiveHamiltonianSampler& sampler, Solver requested) {
  const bool fixed = sampler.time_independent();
  switch (requested) {
    case Solver::Static:
      if (!fixed) throw InvalidArgument("static solver needs a time-independent H_eff");
      return Solver::Static;
    case Solver::Floquet:
      // damped and piecewise driving are not periodic
      return sampler.periodic() || fixed ? Solver::Floquet : Solver::Direct;
    case Solver::Direct:
      return Solver::Direct;
    case Solver::Auto:
      if (fixed) return Solver::Static;
      if (sampler.periodic() && sampler.setup().driving.nu_d >= 1.0) return Solver::Floquet;
      return Solver::Direct;
  }
  return Solver::Direct;
}

YieldResult compute_yield(const SimulationSetup& setup, const RunOptions& opts) {
  const EffectiveHamiltonianSampler sampler(setup);
  const Solver solver = choose_solver(sampler, opts.solver);
  const Matrix rho0 = opts.direct.initial_density
                          ? *opts.direct.initial_density
                          : Matrix(sampler.singlet() / sampler.nuclear_dim());
  YieldResult y;
  if (solver == Solver::Direct) {
    y = singlet_yield(direct_evolve(sampler, opts.direct));
  } else {
    ChannelYields c;
    if (solver == Solver::Static) {
      c = static_yields(sampler, rho0);
    } else {
      const FloquetDecomposition dec = floquet_decompose(sampler, opts.floquet);
      c = floquet_yields(dec, rho0);
      if (!dec.diagonalized) y.warning = "Floquet basis ill-conditioned; used repeated squaring";
    }
    y.phi_singlet = c.singlet;
    y.phi_forward = c.forward;
    y.residual = c.singlet + c.forward - rho0.trace().real();
  }
  y.solver = solver;
  y.orientation = setup.field.direction;
  return y;
}

double relative_anisotropy(double phi_par, double phi_perp) {
  const double m = std::max(phi_par, phi_perp);
  if (m <= 0.0) return 0.0;
  return std::abs(phi_par - phi_perp) / m;
}

OrientationGrid orientation_grid(int level) {
  if (level < 0) throw InvalidArgument("orientation grid level must be >= 0");
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0},
                         {0, -1, p}, {0, 1, p}, {0, -1, -p}, {0, 1, -p},
                         {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  for (auto& x : v) x.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int a = midpoint(f[0], f[1]);
      const int b = midpoint(f[1], f[2]);
      const int c = midpoint(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    faces = std::move(next);
  }
  return {level, std::move(v)};
}

double gamma_anisotropy(const std::vector<double>& yields) {
  if (yields.empty()) throw InvalidArgument("gamma_anisotropy: empty yield list");
  const auto [lo, hi] = std::minmax_element(yields.begin(), yields.end());
  const double mean = std::accumulate(yields.begin(), yields.end(), 0.0) / yields.size();
  if (!(mean > 0.0)) throw InvalidArgument("gamma_anisotropy: mean yield must be positive");
  return (*hi - *lo) / mean;
}

std::pair<Vec3, Vec3> canonical_orientations(const SpinSystem& system) {
  if (system.radicals[0].empty()) {
    throw InvalidArgument(
        "no hyperfine axis on radical A; chi needs an axial model, use gamma_anisotropy instead");
  }
  const Mat3& a = system.radicals[0].front().tensor.matrix;
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (a + a.transpose()));
  const Eigen::Vector3d ev = es.eigenvalues();
  // dominant = largest |eigenvalue|, which must stand apart from the others
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(ev(i)) > std::abs(ev(k))) k = i;
  const double top = std::abs(ev(k));
  for (int i = 0; i < 3; ++i) {
    if (i != k && std::abs(ev(i) - ev(k)) < 1e-9 * std::max(top, 1e-300)) {
      throw InvalidArgument("hyperfine tensor has no unique principal axis; use gamma_anisotropy");
    }
  }
  Vec3 par = es.eigenvectors().col(k);
  Eigen::Index big;
  par.cwiseAbs().maxCoeff(&big);
  if (par(big) < 0) par = -par;
  Vec3 perp = Vec3::UnitX() - par.dot(Vec3::UnitX()) * par;
  if (perp.norm() < 1e-6) perp = Vec3::UnitY() - par.dot(Vec3::UnitY()) * par;
  return {par, perp.normalized()};
}

AnisotropyResult compute_chi(const SimulationSetup& setup, const RunOptions& opts, int workers) {
  const auto [par, perp] = canonical_orientations(setup.system);
  SimulationSetup s_par = setup;
  SimulationSetup s_perp = setup;
  s_par.field.direction = par;
  s_perp.field.direction = perp;
  AnisotropyResult out;
  parallel_for(
      2,
      [&](std::size_t i) {
        if (i == 0) out.parallel = compute_yield(s_par, opts);
        else out.perpendicular = compute_yield(s_perp, opts);
      },
      workers);
  out.chi = relative_anisotropy(out.parallel.phi_singlet, out.perpendicular.phi_singlet);
  return out;
}

std::vector<YieldResult> orientation_map(const SimulationSetup& setup, const OrientationGrid& grid,
                                         const RunOptions& opts, int workers) {
  std::vector<YieldResult> out(grid.count());
  parallel_for(
      grid.count(),
      [&](std::size_t i) {
        SimulationSetup s = setup;
        s.field.direction = grid.vertices[i];
        out[i] = compute_yield(s, opts);
      },
      workers);
  return out;
}

}  // namespace drp
