#include "drp/control.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>

#include <json.hpp>

#include "drp/parallel.hpp"

namespace drp {

std::string to_string(ControlObjective o) {
  return o == ControlObjective::Absolute ? "absolute" : "relative";
}

ControlObjective control_objective_from_string(const std::string& s) {
  if (s == "absolute") return ControlObjective::Absolute;
  if (s == "relative" || s == "chi") return ControlObjective::Relative;
  throw InvalidArgument("unknown control objective '" + s + "' (expected absolute or relative)");
}

void ControlProblem::validate() const {
  system.validate();
  field.validate();
  rates.validate();
  if (!(horizon > 0.0)) throw InvalidArgument("control horizon must be positive");
  if (n_samples < 1) throw InvalidArgument("control needs at least one sample");
  if (n_steps < n_samples) throw InvalidArgument("n_steps must be >= n_samples");
  if (!(lower <= upper)) throw InvalidArgument("control bounds must satisfy lower <= upper");
  if (max_slew < 0.0) throw InvalidArgument("slew limit must be non-negative");
  if (max_iterations < 0 || restarts < 1) throw InvalidArgument("bad iteration budget");
  if (!(fd_step > 0.0)) throw InvalidArgument("finite-difference step must be positive");
}

double ControlProblem::sample_time(int j) const {
  return n_samples == 1 ? 0.0 : horizon * j / (n_samples - 1);
}

namespace {

// Hat-function weight of sample j at time t.
double hat(const ControlProblem& p, int j, double t) {
  if (p.n_samples == 1) return 1.0;
  const double spacing = p.horizon / (p.n_samples - 1);
  const double u = std::abs(t - p.sample_time(j)) / spacing;
  return u < 1.0 ? 1.0 - u : 0.0;
}

}  // namespace

std::vector<double> step_values(const ControlProblem& p, const std::vector<double>& samples) {
  if (static_cast<int>(samples.size()) != p.n_samples) {
    throw DimensionMismatch("control: sample count does not match problem");
  }
  std::vector<double> x(p.n_steps);
  const double h = p.step_length();
  for (int n = 0; n < p.n_steps; ++n) {
    const double t = (n + 0.5) * h;
    if (p.n_samples == 1) {
      x[n] = samples[0];
      continue;
    }
    const double spacing = p.horizon / (p.n_samples - 1);
    int j = std::min(static_cast<int>(t / spacing), p.n_samples - 2);
    const double w = (t - p.sample_time(j)) / spacing;
    x[n] = samples[j] + w * (samples[j + 1] - samples[j]);
  }
  return x;
}

std::vector<double> project_feasible(const ControlProblem& p, std::vector<double> s) {
  for (double& v : s) v = std::clamp(v, p.lower, p.upper);
  if (p.n_samples > 1 && p.max_slew > 0.0) {
    const double lim = p.max_slew * p.horizon / (p.n_samples - 1);
    for (std::size_t j = 1; j < s.size(); ++j) s[j] = std::clamp(s[j], s[j - 1] - lim, s[j - 1] + lim);
    for (std::size_t j = s.size() - 1; j-- > 0;) s[j] = std::clamp(s[j], s[j + 1] - lim, s[j + 1] + lim);
  }
  return s;
}

bool is_feasible(const ControlProblem& p, const std::vector<double>& s) {
  for (double v : s)
    if (v < p.lower - 1e-12 || v > p.upper + 1e-12) return false;
  if (p.n_samples > 1 && p.max_slew > 0.0) {
    const double lim = p.max_slew * p.horizon / (p.n_samples - 1);
    for (std::size_t j = 1; j < s.size(); ++j)
      if (std::abs(s[j] - s[j - 1]) > lim + 1e-12) return false;
  }
  return true;
}

namespace {

struct StepData {
  Matrix u;  // step propagator including all decay
  Matrix q;  // int_0^h e^{A^dag s} k_b P_S e^{A s} ds
};

// Exact step data and yield bookkeeping for one field orientation.
class OrientationModel {
 public:
  OrientationModel(const ControlProblem& p, const Vec3& dir)
      : p_(p), sampler_(make_setup(p, dir)), h_(p.step_length()) {
    const int z = sampler_.nuclear_dim();
    rho0_ = sampler_.singlet() / z;
  }

  // Forward pass. Stores rho_n, cumulative yields and step data.
  double forward(const std::vector<double>& x) {
    const int n = p_.n_steps;
    steps_.resize(n);
    rho_.resize(n + 1);
    cum_.assign(n + 1, 0.0);
    rho_[0] = rho0_;
    for (int k = 0; k < n; ++k) {
      steps_[k] = step(x[k]);
      cum_[k + 1] = cum_[k] + (steps_[k].q * rho_[k]).trace().real();
      rho_[k + 1] = steps_[k].u * rho_[k] * steps_[k].u.adjoint();
    }
    tail_ = tail(x[n - 1]);
    return cum_[n] + (tail_ * rho_[n]).trace().real();
  }

  // Adjoint pass: lambda_n = q_n + u_n^dag lambda_{n+1} u_n.
  void backward() {
    const int n = p_.n_steps;
    lambda_.resize(n + 1);
    lambda_[n] = tail_;
    for (int k = n - 1; k >= 0; --k) {
      lambda_[k] = steps_[k].q + steps_[k].u.adjoint() * lambda_[k + 1] * steps_[k].u;
    }
  }

  // Yield with steps [a, b) replaced by displacements xs (b - a values).
  double window(int a, int b, const std::vector<double>& xs) const {
    Matrix rho = rho_[a];
    double phi = cum_[a];
    for (int k = a; k < b; ++k) {
      const StepData sd = step(xs[k - a]);
      phi += (sd.q * rho).trace().real();
      rho = sd.u * rho * sd.u.adjoint();
    }
    const Matrix& lam = b == p_.n_steps ? tail(xs.back()) : lambda_[b];
    return phi + (lam * rho).trace().real();
  }

 private:
  static SimulationSetup make_setup(const ControlProblem& p, const Vec3& dir) {
    SimulationSetup s;
    s.system = p.system;
    s.field = p.field;
    s.field.direction = dir;
    s.rates = p.rates;
    s.j0_mhz = p.j0_mhz;
    s.include_eed = p.include_eed;
    return s;
  }

  // Van Loan block exponential over length len at displacement x.
  void van_loan(double x, double len, Matrix& u, Matrix& q) const {
    const int n = sampler_.dim();
    const HilbertLayout& layout = sampler_.layout();
    const Matrix heff = sampler_.static_hamiltonian() +
                        embed_electronic(sampler_.electronic_at_displacement(x), layout);
    const Matrix a = -kI * heff - 0.5 * p_.rates.kf * Matrix::Identity(n, n);
    Matrix c = Matrix::Zero(2 * n, 2 * n);
    c.topLeftCorner(n, n) = -a.adjoint() * len;
    c.topRightCorner(n, n) = sampler_.kb_at_displacement(x) * sampler_.singlet() * len;
    c.bottomRightCorner(n, n) = a * len;
    const Matrix e = expm(c);
    u = e.bottomRightCorner(n, n);
    q = u.adjoint() * e.topRightCorner(n, n);
  }

  StepData step(double x) const {
    const bool at_bound = x == p_.lower || x == p_.upper;
    if (at_bound) {
      auto it = cache_.find(x);
      if (it != cache_.end()) return it->second;
    }
    StepData sd;
    van_loan(x, h_, sd.u, sd.q);
    if (at_bound) cache_.emplace(x, sd);
    return sd;
  }

  // sum_n (U^n)^dag Q U^n for a 1 us segment held at x.
  Matrix tail(double x) const {
    auto it = tail_cache_.find(x);
    if (it != tail_cache_.end()) return it->second;
    Matrix u, q;
    van_loan(x, 1.0, u, q);
    Matrix l = q;
    Matrix pw = u;
    for (int it2 = 0; it2 < 64 && pw.cwiseAbs().maxCoeff() > 1e-18; ++it2) {
      l += pw.adjoint() * l * pw;
      pw = pw * pw;
    }
    if (x == p_.lower || x == p_.upper) tail_cache_.emplace(x, l);
    return l;
  }

  const ControlProblem& p_;
  EffectiveHamiltonianSampler sampler_;
  double h_;
  Matrix rho0_;
  std::vector<StepData> steps_;
  std::vector<Matrix> rho_;
  std::vector<Matrix> lambda_;
  std::vector<double> cum_;
  Matrix tail_;
  mutable std::map<double, StepData> cache_;
  mutable std::map<double, Matrix> tail_cache_;
};

double objective_value(const ControlProblem& p, double a, double b) {
  return p.objective == ControlObjective::Absolute ? std::abs(a - b) : relative_anisotropy(a, b);
}

class Evaluator {
 public:
  explicit Evaluator(const ControlProblem& p)
      : p_(p),
        par_(p, canonical_orientations(p.system).first),
        perp_(p, canonical_orientations(p.system).second) {}

  ControlEvaluation evaluate(const std::vector<double>& samples) {
    samples_ = samples;
    x_ = step_values(p_, samples);
    ControlEvaluation e;
    e.phi_par = par_.forward(x_);
    e.phi_perp = perp_.forward(x_);
    e.objective = objective_value(p_, e.phi_par, e.phi_perp);
    e.chi = relative_anisotropy(e.phi_par, e.phi_perp);
    current_ = e;
    have_adjoint_ = false;
    return e;
  }

  // Forward-difference gradient at the last evaluated point.
  std::vector<double> gradient() {
    if (!have_adjoint_) {
      par_.backward();
      perp_.backward();
      have_adjoint_ = true;
    }
    const int m = p_.n_samples;
    const double h = p_.step_length();
    std::vector<double> g(m);
    for (int j = 0; j < m; ++j) {
      double delta = p_.fd_step;
      if (samples_[j] + delta > p_.upper) delta = -delta;
      int a = 0, b = p_.n_steps;
      if (m > 1) {
        const double spacing = p_.horizon / (m - 1);
        const double lo = p_.sample_time(j) - spacing;
        const double hi = p_.sample_time(j) + spacing;
        a = std::max(0, static_cast<int>(std::floor(lo / h - 0.5)));
        b = std::min(p_.n_steps, static_cast<int>(std::ceil(hi / h - 0.5)) + 1);
      }
      std::vector<double> xs(b - a);
      for (int k = a; k < b; ++k) xs[k - a] = x_[k] + delta * hat(p_, j, (k + 0.5) * h);
      const double fp = par_.window(a, b, xs);
      const double fq = perp_.window(a, b, xs);
      g[j] = (objective_value(p_, fp, fq) - current_.objective) / delta;
    }
    return g;
  }

 private:
  const ControlProblem& p_;
  OrientationModel par_;
  OrientationModel perp_;
  std::vector<double> samples_;
  std::vector<double> x_;
  ControlEvaluation current_;
  bool have_adjoint_ = false;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct RestartOutcome {
  std::vector<double> samples;
  ControlEvaluation value;
  std::vector<IterationRecord> log;
  bool converged = false;
};

RestartOutcome run_restart(const ControlProblem& p, int restart) {
  std::mt19937_64 rng(p.seed * 1000003ULL + static_cast<std::uint64_t>(restart));
  // square wave between the bounds with random frequency, duty and phase
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double nu = 0.5 + 7.5 * unit(rng);
  const double duty = 0.3 + 0.4 * unit(rng);
  const double phase = unit(rng);
  std::vector<double> x(p.n_samples);
  for (int j = 0; j < p.n_samples; ++j) {
    const double c = std::fmod(nu * p.sample_time(j) + phase, 1.0);
    x[j] = c < duty ? p.upper : p.lower;
  }
  x = project_feasible(p, x);

  Evaluator ev(p);
  RestartOutcome out;
  ControlEvaluation f = ev.evaluate(x);
  out.log.push_back({restart, 0, f.objective, f.objective, 0.0});

  constexpr int kMemory = 8;
  std::vector<std::vector<double>> s_hist, y_hist;
  std::vector<double> g = ev.gradient();
  int stalls = 0;

  // Armijo backtracking along the projected path x + t d.
  std::vector<double> x_new;
  ControlEvaluation f_new;
  auto line_search = [&](const std::vector<double>& d, const std::vector<double>& grad) {
    double t = 1.0;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      x_new = x;
      for (int j = 0; j < p.n_samples; ++j) x_new[j] += t * d[j];
      x_new = project_feasible(p, x_new);
      std::vector<double> step(p.n_samples);
      for (int j = 0; j < p.n_samples; ++j) step[j] = x_new[j] - x[j];
      if (std::sqrt(dot(step, step)) < 1e-12) return false;
      f_new = ev.evaluate(x_new);
      if (f_new.objective > f.objective + 1e-4 * dot(grad, step)) return true;
    }
    return false;
  };
  auto steepest = [&](const std::vector<double>& pg) {
    double m = 0.0;
    for (double v : pg) m = std::max(m, std::abs(v));
    std::vector<double> d = pg;
    for (double& v : d) v *= 0.5 * (p.upper - p.lower) / m;
    return d;
  };

  for (int it = 1; it <= p.max_iterations; ++it) {
    // gradient components pushing out of an active bound carry no information
    std::vector<char> active(p.n_samples, 0);
    std::vector<double> pg = g;
    for (int j = 0; j < p.n_samples; ++j) {
      if ((x[j] >= p.upper && pg[j] > 0.0) || (x[j] <= p.lower && pg[j] < 0.0)) {
        active[j] = 1;
        pg[j] = 0.0;
      }
    }
    const double gnorm = std::sqrt(dot(pg, pg));
    if (gnorm < 1e-10) {
      out.converged = true;
      break;
    }
    // two-loop recursion on the ascent problem, restricted to free samples
    std::vector<double> d = pg;
    bool quasi_newton = !s_hist.empty();
    if (quasi_newton) {
      std::vector<double> alpha(s_hist.size());
      for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
        alpha[k] = dot(s_hist[k], d) / dot(y_hist[k], s_hist[k]);
        for (int j = 0; j < p.n_samples; ++j) d[j] -= alpha[k] * y_hist[k][j];
      }
      const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
      for (double& v : d) v *= gamma;
      for (std::size_t k = 0; k < s_hist.size(); ++k) {
        const double beta = dot(y_hist[k], d) / dot(y_hist[k], s_hist[k]);
        for (int j = 0; j < p.n_samples; ++j) d[j] += (alpha[k] - beta) * s_hist[k][j];
      }
      for (int j = 0; j < p.n_samples; ++j)
        if (active[j]) d[j] = 0.0;
      if (dot(d, pg) <= 0.0) quasi_newton = false;
    }
    if (!quasi_newton) d = steepest(pg);

    bool accepted = line_search(d, g);
    if (!accepted && quasi_newton) {
      s_hist.clear();
      y_hist.clear();
      accepted = line_search(steepest(pg), g);
    }
    if (!accepted) {
      // restore the evaluator state and stop: no ascent step found
      ev.evaluate(x);
      out.converged = true;
      break;
    }
    std::vector<double> s(p.n_samples), y(p.n_samples);
    const std::vector<double> g_new = ev.gradient();
    for (int j = 0; j < p.n_samples; ++j) {
      s[j] = x_new[j] - x[j];
      y[j] = -(g_new[j] - g[j]);  // curvature of the minimised -f
    }
    const double step_norm = std::sqrt(dot(s, s));
    if (dot(s, y) > 1e-12 * step_norm * std::sqrt(dot(y, y))) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      if (static_cast<int>(s_hist.size()) > kMemory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
      }
    }
    const double gain = f_new.objective - f.objective;
    x = std::move(x_new);
    f = f_new;
    g = g_new;
    out.log.push_back({restart, it, f.objective, f.objective, step_norm});
    stalls = gain < 1e-8 * std::max(1.0, std::abs(f.objective)) ? stalls + 1 : 0;
    if (stalls >= 3) {
      out.converged = true;
      break;
    }
  }
  out.samples = x;
  out.value = f;
  return out;
}

}  // namespace

ControlEvaluation evaluate_control(const ControlProblem& p, const std::vector<double>& samples) {
  p.validate();
  Evaluator ev(p);
  return ev.evaluate(samples);
}

double objective_anisotropy(const ControlProblem& p, const std::vector<double>& samples) {
  const auto e = evaluate_control(p, samples);
  return std::abs(e.phi_par - e.phi_perp);
}

double ControlResult::bang_bang_fraction(const ControlProblem& p) const {
  const auto x = step_values(p, samples);
  int hits = 0;
  for (double v : x)
    if (std::abs(v - p.lower) < 1e-9 || std::abs(v - p.upper) < 1e-9) ++hits;
  return x.empty() ? 0.0 : static_cast<double>(hits) / x.size();
}

ControlResult optimize(const ControlProblem& p) {
  p.validate();
  std::vector<RestartOutcome> runs(p.restarts);
  parallel_for(
      runs.size(), [&](std::size_t r) { runs[r] = run_restart(p, static_cast<int>(r)); },
      p.workers);

  ControlResult result;
  double best = -1.0;
  bool all_converged = true;
  for (int r = 0; r < p.restarts; ++r) {
    for (auto rec : runs[r].log) {
      best = std::max(best, rec.objective);
      rec.best = best;
      result.log.push_back(rec);
    }
    all_converged = all_converged && runs[r].converged;
    if (r == 0 || runs[r].value.objective > result.value.objective) {
      result.value = runs[r].value;
      result.samples = runs[r].samples;
      result.best_restart = r;
    }
  }
  result.status = all_converged ? "converged" : "budget_exhausted";
  return result;
}

void write_control_csv(std::ostream& os, const ControlProblem& p, const std::vector<double>& samples) {
  const auto x = step_values(p, samples);
  os << "t_us,displacement_angstrom\n";
  os.precision(12);
  const double h = p.step_length();
  for (int n = 0; n < p.n_steps; ++n) os << n * h << ',' << x[n] << '\n';
  os << p.horizon << ',' << x.back() << '\n';
}

std::string control_log_json(const ControlProblem& p, const ControlResult& r) {
  nlohmann::json j;
  j["objective_kind"] = to_string(p.objective);
  j["status"] = r.status;
  j["best_restart"] = r.best_restart;
  j["objective"] = r.value.objective;
  j["phi_par"] = r.value.phi_par;
  j["phi_perp"] = r.value.phi_perp;
  j["chi"] = r.value.chi;
  j["bang_bang_fraction"] = r.bang_bang_fraction(p);
  auto& log = j["iterations"] = nlohmann::json::array();
  for (const auto& rec : r.log) {
    log.push_back({{"restart", rec.restart},
                   {"iteration", rec.iteration},
                   {"objective", rec.objective},
                   {"best", rec.best},
                   {"step_norm", rec.step_norm}});
  }
  return j.dump(2);
}

}  // namespace drp
