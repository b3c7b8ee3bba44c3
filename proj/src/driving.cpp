#include "drp/driving.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace drp {

std::string to_string(DrivingKind kind) {
  switch (kind) {
    case DrivingKind::Static: return "static";
    case DrivingKind::Harmonic: return "harmonic";
    case DrivingKind::Damped: return "damped";
    case DrivingKind::Piecewise: return "piecewise";
  }
  return "unknown";
}

DrivingKind driving_kind_from_string(const std::string& s) {
  if (s == "static") return DrivingKind::Static;
  if (s == "harmonic") return DrivingKind::Harmonic;
  if (s == "damped") return DrivingKind::Damped;
  if (s == "piecewise") return DrivingKind::Piecewise;
  throw InvalidArgument("unknown driving kind '" + s + "'");
}

void DrivingConfig::validate() const {
  if (!(delta_d >= 0.0) || !std::isfinite(delta_d)) {
    throw InvalidArgument("driving amplitude must be finite and non-negative");
  }
  if ((kind == DrivingKind::Harmonic || kind == DrivingKind::Damped) &&
      !(nu_d > 0.0 && std::isfinite(nu_d))) {
    throw InvalidArgument("driving frequency must be positive for " + to_string(kind));
  }
  if (kind == DrivingKind::Damped && !(tau > 0.0)) {
    throw InvalidArgument("damped driving needs a positive damping time");
  }
  if (axis && std::abs(axis->norm() - 1.0) > 1e-12) {
    throw InvalidArgument("driving axis must be a unit vector");
  }
  if (kind == DrivingKind::Piecewise) {
    if (knots.empty()) throw InvalidArgument("piecewise driving needs at least one knot");
    for (std::size_t k = 1; k < knots.size(); ++k) {
      const double dt = knots[k].t_us - knots[k - 1].t_us;
      if (!(dt > 0.0)) throw InvalidArgument("piecewise knots must be strictly increasing in time");
      if (max_slew > 0.0 &&
          std::abs(knots[k].displacement - knots[k - 1].displacement) > max_slew * dt * (1 + 1e-12)) {
        throw InvalidArgument("piecewise knots exceed the slew-rate bound");
      }
    }
  }
}

double DrivingConfig::period() const {
  if (kind != DrivingKind::Harmonic) return std::numeric_limits<double>::infinity();
  return 1.0 / nu_d;
}

DrivingConfig static_driving() { return {}; }

DrivingConfig harmonic_driving(double delta_d, double nu_d, DrivingSign sign) {
  DrivingConfig cfg;
  cfg.kind = DrivingKind::Harmonic;
  cfg.delta_d = delta_d;
  cfg.nu_d = nu_d;
  cfg.sign = sign;
  return cfg;
}

double displacement(double t, const DrivingConfig& cfg) {
  const double sgn = cfg.sign == DrivingSign::Increase ? 1.0 : -1.0;
  switch (cfg.kind) {
    case DrivingKind::Static:
      return 0.0;
    case DrivingKind::Harmonic:
      return sgn * 0.5 * cfg.delta_d * (1.0 - std::cos(kTwoPi * cfg.nu_d * t));
    case DrivingKind::Damped:
      return sgn * 0.5 * cfg.delta_d * (1.0 - std::cos(kTwoPi * cfg.nu_d * t)) *
             std::exp(-t / cfg.tau);
    case DrivingKind::Piecewise: {
      const auto& k = cfg.knots;
      if (k.empty()) return 0.0;
      if (t <= k.front().t_us) return k.front().displacement;
      if (t >= k.back().t_us) return k.back().displacement;
      auto hi = std::upper_bound(k.begin(), k.end(), t,
                                 [](double v, const Knot& kn) { return v < kn.t_us; });
      auto lo = hi - 1;
      const double w = (t - lo->t_us) / (hi->t_us - lo->t_us);
      return (1.0 - w) * lo->displacement + w * hi->displacement;
    }
  }
  return 0.0;
}

double distance(double t, const DrivingConfig& cfg) { return cfg.r0 + displacement(t, cfg); }

double distance_factor(double t, const DrivingConfig& cfg, double beta) {
  return std::exp(-beta * displacement(t, cfg));
}

double rate_at(double t, const DrivingConfig& cfg, const RateModel& rates) {
  return rates.kb0 * distance_factor(t, cfg, rates.beta);
}

double coupling_at(double t, const DrivingConfig& cfg, double j0_mhz, double beta) {
  return j0_mhz * distance_factor(t, cfg, beta);
}

double bessel_i0(double x) {
  const double ax = std::abs(x);
  if (ax < 40.0) {
    // sum_k (x^2/4)^k / (k!)^2; every term is positive so there is no
    // cancellation and the series is accurate to rounding over this range.
    const double q = 0.25 * ax * ax;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return sum;
  }
  // Hankel asymptotic expansion, e^x / sqrt(2 pi x) sum_k ((2k-1)!!)^2 / (k! (8x)^k).
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= odd * odd / (k * 8.0 * ax);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return std::exp(ax) / std::sqrt(kTwoPi * ax) * sum;
}

double time_average_factor(double beta, double delta_d) {
  if (!(beta >= 0.0) || !(delta_d >= 0.0)) {
    throw InvalidArgument("time_average_factor: beta and delta_d must be non-negative");
  }
  const double x = 0.5 * beta * delta_d;
  if (x >= 40.0) {
    // e^{-x} I0(x) without overflow
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 30; ++k) {
      const double odd = 2.0 * k - 1.0;
      term *= odd * odd / (k * 8.0 * x);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return sum / std::sqrt(kTwoPi * x);
  }
  return std::exp(-x) * bessel_i0(x);
}

Vec3 eed_displacement(double t, const DrivingConfig& cfg, const Vec3& r0_vec) {
  const Vec3 axis = cfg.axis ? *cfg.axis : Vec3(r0_vec.normalized());
  return r0_vec + displacement(t, cfg) * axis;
}

void write_trajectory_csv(std::ostream& os, const DrivingConfig& cfg,
                          const std::vector<double>& t_grid) {
  os << "t_us,r_angstrom\n";
  os << std::setprecision(17);
  for (double t : t_grid) os << t << ',' << distance(t, cfg) << '\n';
}

DrivingConfig read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("trajectory csv: empty input");
  if (line.rfind("t_us", 0) != 0) throw InvalidArgument("trajectory csv: missing header t_us,r_angstrom");
  // control output stores displacements directly
  const bool relative = line.find("displacement") != std::string::npos;
  DrivingConfig cfg;
  cfg.kind = DrivingKind::Piecewise;
  int lineno = 1;
  bool first = true;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    double t = 0.0, r = 0.0;
    char comma = 0;
    if (!(row >> t >> comma >> r) || comma != ',') {
      throw InvalidArgument("trajectory csv: malformed row at line " + std::to_string(lineno));
    }
    if (first) {
      cfg.r0 = relative ? 0.0 : r;
      first = false;
    }
    cfg.knots.push_back({t, r - cfg.r0});
  }
  if (cfg.knots.empty()) throw InvalidArgument("trajectory csv: no rows");
  for (const auto& k : cfg.knots) cfg.delta_d = std::max(cfg.delta_d, std::abs(k.displacement));
  cfg.validate();
  return cfg;
}

}  // namespace drp
