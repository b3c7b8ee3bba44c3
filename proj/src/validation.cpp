#include "drp/validation.hpp"

#include <cmath>

#include "drp/metrics.hpp"
#include "drp/models.hpp"

namespace drp {

namespace {

CheckResult compare(std::string name, double value, double expected, double tol) {
  CheckResult r;
  r.name = std::move(name);
  r.value = value;
  r.expected = expected;
  r.tolerance = tol;
  r.passed = std::isfinite(value) && std::abs(value - expected) <= tol;
  return r;
}

template <class F>
CheckResult guarded(const std::string& name, F f) {
  try {
    return f();
  } catch (const std::exception& e) {
    CheckResult r;
    r.name = name;
    r.detail = e.what();
    return r;
  }
}

}  // namespace

std::vector<CheckResult> run_builtin_checks() {
  std::vector<CheckResult> out;

  out.push_back(guarded("gyromagnetic_ratio", [] {
    return compare("gyromagnetic_ratio", mt_to_mhz(1.7569), 49.23, 0.1);
  }));

  out.push_back(guarded("trivial_decay", [] {
    SimulationSetup s;
    s.system.radicals = {};
    s.field.magnitude_mt = 0.0;
    return compare("trivial_decay", compute_yield(s).phi_singlet, 2.0 / 3.0, 1e-8);
  }));

  out.push_back(guarded("bessel_time_average", [] {
    double worst = 0.0;
    for (double beta : {0.5, 1.0, 1.4, 2.0})
      for (double d : {0.5, 1.0, 2.0, 3.0, 6.0}) {
        // composite Simpson over one period of exp(-beta (d/2)(1 - cos))
        const int n = 2000;
        double sum = 0.0;
        for (int i = 0; i <= n; ++i) {
          const double th = kTwoPi * i / n;
          const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
          sum += w * std::exp(-beta * 0.5 * d * (1.0 - std::cos(th)));
        }
        const double quad = sum / (3.0 * n);
        worst = std::max(worst, std::abs(quad - time_average_factor(beta, d)));
      }
    return compare("bessel_time_average", worst, 0.0, 1e-9);
  }));

  out.push_back(guarded("level_crossing", [] {
    FieldConfig f;
    const double expected = level_crossing_J(larmor_mhz(f.magnitude_mt), kOneNitrogenAParMHz);
    return compare("level_crossing", scan_level_crossing(f), expected, 0.05);
  }));

  out.push_back(guarded("singlet_concurrence", [] {
    Matrix4 s = Matrix4::Zero();
    s(1, 1) = s(2, 2) = 0.5;
    s(1, 2) = s(2, 1) = -0.5;
    return compare("singlet_concurrence", concurrence(s), 1.0, 1e-10);
  }));

  out.push_back(guarded("singlet_log_negativity", [] {
    Matrix4 s = Matrix4::Zero();
    s(1, 1) = s(2, 2) = 0.5;
    s(1, 2) = s(2, 1) = -0.5;
    return compare("singlet_log_negativity", log_negativity(s), 1.0, 1e-10);
  }));

  out.push_back(guarded("yield_conservation", [] {
    double worst = 0.0;
    for (double j0 : {0.0, 15.0})
      for (double nu : {0.0, 3.0}) {
        SimulationSetup s;
        s.system = preset_system("one_nitrogen");
        s.j0_mhz = j0;
        if (nu > 0.0) s.driving = harmonic_driving(2.0, nu);
        s.field.direction = Vec3(1.0, 1.0, 1.0).normalized();
        const auto y = compute_yield(s);
        worst = std::max(worst, std::abs(y.phi_singlet + y.phi_forward + y.trace_remaining - 1.0));
      }
    return compare("yield_conservation", worst, 0.0, 1e-5);
  }));

  out.push_back(guarded("floquet_vs_direct", [] {
    SimulationSetup s;
    s.system = preset_system("one_nitrogen");
    s.j0_mhz = 12.0;
    s.driving = harmonic_driving(3.0, 2.5);
    RunOptions f, d;
    f.solver = Solver::Floquet;
    d.solver = Solver::Direct;
    d.direct.t_max = 25.0;
    const double a = compute_yield(s, f).phi_singlet;
    const double b = compute_yield(s, d).phi_singlet;
    return compare("floquet_vs_direct", a - b, 0.0, 1e-6);
  }));

  return out;
}

}  // namespace drp
