#include "drp/floquet.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace drp {

namespace {

double one_norm(const Matrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

// Trace of P_S X^dag X-like products without forming P_S: X^dag P_S X = Y^dag Y
// with Y = (<S| (x) I) X.
Matrix singlet_gram(const Matrix& x, int z) {
  const Matrix y = (x.middleRows(z, z) - x.middleRows(2 * z, z)) / std::sqrt(2.0);
  return y.adjoint() * y;
}

}  // namespace

Matrix FloquetDecomposition::phi(int k) const {
  if (!diagonalized) throw ConvergenceError("phi: decomposition was not diagonalised");
  if (k < 0 || k >= static_cast<int>(samples.size())) throw InvalidArgument("phi: sample out of range");
  const double t = k * sample_stride * dt;
  // phi(t) = U(t) V e^{iEt}; with k_f factored out this is U'(t) V e^{iE't}
  const Vector phase = (multipliers.array().log() * (-t / period)).exp();
  return samples[k] * modes * phase.asDiagonal();
}

FloquetDecomposition floquet_decompose(const EffectiveHamiltonianSampler& sampler,
                                       const FloquetOptions& opts) {
  double period = 0.0;
  if (sampler.periodic() && !sampler.time_independent()) {
    period = sampler.period();
  } else if (sampler.time_independent()) {
    period = opts.period > 0.0 ? opts.period
                               : (sampler.periodic() ? sampler.period() : 1.0);
  } else {
    throw InvalidArgument("floquet_decompose: H_eff is not periodic");
  }

  FloquetDecomposition dec;
  dec.period = period;
  dec.kf = sampler.kf();
  dec.sampler = std::make_shared<const EffectiveHamiltonianSampler>(sampler);
  int steps = opts.steps_per_period;
  if (steps <= 0) {
    steps = static_cast<int>(std::ceil(period / default_time_step(sampler) - 1e-9));
  }
  steps = std::max(steps, 4);
  if (steps % 2) ++steps;
  dec.steps_per_period = steps;
  dec.dt = period / steps;
  dec.sample_stride = opts.sample_stride > 0 ? opts.sample_stride : std::max(1, steps / 64);

  const Stepper stepper(*dec.sampler, dec.dt, opts.scheme);
  dec.scheme = stepper.scheme();
  const int n = sampler.dim();
  const int z = sampler.nuclear_dim();
  const double kf = dec.kf;

  Matrix u = Matrix::Identity(n, n);
  if (opts.accumulate_yields) {
    dec.singlet_integral = Matrix::Zero(n, n);
    dec.forward_integral = Matrix::Zero(n, n);
  }
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dec.dt;
    if (k % dec.sample_stride == 0 && k < steps) dec.samples.push_back(u);
    if (opts.accumulate_yields) {
      const double w = (k == 0 || k == steps) ? 0.5 * dec.dt : dec.dt;
      const double decay = std::exp(-kf * t);
      const Matrix gs = (dec.sampler->kb(t) * decay) * singlet_gram(u, z);
      const Matrix gf = (kf * decay) * (u.adjoint() * u);
      dec.singlet_integral += w * gs;
      dec.forward_integral += w * gf;
      if (k < 4) {
        dec.singlet_head[k] = gs;
        dec.forward_head[k] = gf;
      }
    }
    if (k < steps) stepper.advance(t, u);
  }
  dec.one_period = u;

  Eigen::ComplexEigenSolver<Matrix> es(dec.one_period);
  bool ok = es.info() == Eigen::Success;
  if (ok) {
    dec.modes = es.eigenvectors();
    for (Eigen::Index c = 0; c < dec.modes.cols(); ++c) dec.modes.col(c).normalize();
    Eigen::PartialPivLU<Matrix> lu(dec.modes);
    dec.modes_inverse = lu.inverse();
    dec.condition_estimate = one_norm(dec.modes) * one_norm(dec.modes_inverse);
    ok = std::isfinite(dec.condition_estimate) && dec.condition_estimate <= opts.condition_threshold;
    dec.multipliers = es.eigenvalues();
  } else {
    dec.condition_estimate = std::numeric_limits<double>::infinity();
  }
  if (!ok && !opts.fallback) {
    throw ConvergenceError(
        "floquet_decompose: ill-conditioned Floquet eigenbasis (condition estimate " +
        std::to_string(dec.condition_estimate) + "); use repeated squaring instead");
  }
  dec.diagonalized = ok;
  if (es.info() == Eigen::Success) {
    // E = i log(mu)/T - i k_f/2
    dec.quasienergies =
        (kI / period) * dec.multipliers.array().log() - Vector::Constant(n, kI * 0.5 * kf).array();
  }
  return dec;
}

Matrix one_period_power(const FloquetDecomposition& dec, long n) {
  if (n < 0) throw InvalidArgument("one_period_power: negative power");
  if (dec.diagonalized) {
    const Vector p = dec.multipliers.array().pow(static_cast<double>(n));
    return dec.modes * p.asDiagonal() * dec.modes_inverse;
  }
  const auto dim = dec.one_period.rows();
  Matrix result = Matrix::Identity(dim, dim);
  Matrix base = dec.one_period;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n) base = base * base;
  }
  return result;
}

Matrix floquet_propagator(const FloquetDecomposition& dec, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("floquet_propagator: negative time");
  auto periods = static_cast<long>(std::floor(t / dec.period * (1.0 + 1e-14)));
  double tau = t - periods * dec.period;
  if (tau < 0.0) tau = 0.0;
  const Stepper stepper(*dec.sampler, dec.dt, dec.scheme);
  auto step_index = static_cast<long>(std::floor(tau / dec.dt * (1.0 + 1e-14)));
  if (step_index >= dec.steps_per_period) {
    ++periods;
    tau = 0.0;
    step_index = 0;
  }
  const long sample = std::min<long>(step_index / dec.sample_stride,
                                     static_cast<long>(dec.samples.size()) - 1);
  Matrix within = dec.samples[sample];
  for (long k = sample * dec.sample_stride; k < step_index; ++k) stepper.advance(k * dec.dt, within);
  const double rest = tau - step_index * dec.dt;
  if (rest > 1e-13 * dec.dt) stepper.advance(step_index * dec.dt, rest, within);
  return std::exp(-0.5 * dec.kf * t) * (within * one_period_power(dec, periods));
}

double geometric_trace_sum(const Matrix& q, const Matrix& m, const Matrix& rho0) {
  // S = sum_n M^n rho M^n^dag by doubling: S_{2N} = S_N + M^N S_N M^N^dag.
  Matrix s = rho0;
  Matrix p = m;
  for (int it = 0; it < 200; ++it) {
    const double pn = p.cwiseAbs().maxCoeff();
    if (pn < 1e-18) return (q * s).trace().real();
    if (!std::isfinite(pn) || pn > 1e150) break;
    s += p * s * p.adjoint();
    p = p * p;
  }
  throw ConvergenceError("geometric_trace_sum: propagator powers do not decay");
}

namespace {

double eigen_sum(const Matrix& q, const Matrix& v, const Matrix& vinv, const Vector& mu,
                 const Matrix& rho0) {
  const Matrix w = v.adjoint() * q * v;
  const Matrix m = vinv * rho0 * vinv.adjoint();
  cplx total = 0.0;
  const auto n = mu.size();
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const cplx g = 1.0 - mu(a) * std::conj(mu(b));
      if (std::abs(g) < 1e-15) throw ConvergenceError("yield sum does not converge (no decay)");
      total += w(b, a) * m(a, b) / g;
    }
  }
  return total.real();
}

double endpoint_correction(const std::array<Matrix, 4>& head, const Matrix& rho0, double h) {
  // Euler-Maclaurin: int_0^inf f = trapezoid + h^2/12 f'(0) + O(h^4)
  double f[4];
  for (int k = 0; k < 4; ++k) f[k] = (head[k] * rho0).trace().real();
  const double slope = (-11.0 * f[0] + 18.0 * f[1] - 9.0 * f[2] + 2.0 * f[3]) / (6.0 * h);
  return h * h / 12.0 * slope;
}

}  // namespace

ChannelYields floquet_yields(const FloquetDecomposition& dec, const Matrix& rho0) {
  if (dec.singlet_integral.size() == 0) {
    throw InvalidArgument("floquet_yields: decomposition built without yield integrals");
  }
  if (rho0.rows() != dec.one_period.rows() || rho0.cols() != dec.one_period.cols()) {
    throw DimensionMismatch("floquet_yields: initial density has wrong dimension");
  }
  const double damp = std::exp(-0.5 * dec.kf * dec.period);
  ChannelYields y;
  if (dec.diagonalized) {
    const Vector mu = dec.multipliers * damp;
    y.singlet = eigen_sum(dec.singlet_integral, dec.modes, dec.modes_inverse, mu, rho0);
    y.forward = eigen_sum(dec.forward_integral, dec.modes, dec.modes_inverse, mu, rho0);
  } else {
    const Matrix m = dec.one_period * damp;
    y.singlet = geometric_trace_sum(dec.singlet_integral, m, rho0);
    y.forward = geometric_trace_sum(dec.forward_integral, m, rho0);
  }
  y.singlet += endpoint_correction(dec.singlet_head, rho0, dec.dt);
  y.forward += endpoint_correction(dec.forward_head, rho0, dec.dt);
  return y;
}

ChannelYields static_yields(const EffectiveHamiltonianSampler& sampler, const Matrix& rho0) {
  if (!sampler.time_independent()) {
    throw InvalidArgument("static_yields: H_eff is time dependent");
  }
  const int n = sampler.dim();
  if (rho0.rows() != n || rho0.cols() != n) {
    throw DimensionMismatch("static_yields: initial density has wrong dimension");
  }
  const double kb = sampler.kb(0.0);
  const double kf = sampler.kf();
  const Matrix a = -kI * sampler.effective(0.0);
  // Segment length: long enough for decay per segment, short enough for a
  // well-scaled exponential.
  const double seg = 1.0;

  // Van Loan: exp([[-A^dag, B], [0, A]] T) has top-right block G with
  // e^{A^dag T} G = int_0^T e^{A^dag s} B e^{A s} ds.
  auto segment_integral = [&](const Matrix& b, Matrix& u) {
    Matrix c = Matrix::Zero(2 * n, 2 * n);
    c.topLeftCorner(n, n) = -a.adjoint() * seg;
    c.topRightCorner(n, n) = b * seg;
    c.bottomRightCorner(n, n) = a * seg;
    const Matrix e = expm(c);
    u = e.bottomRightCorner(n, n);
    return Matrix(u.adjoint() * e.topRightCorner(n, n));
  };
  Matrix u;
  const Matrix qs = segment_integral(kb * sampler.singlet(), u);
  const Matrix qf = segment_integral(kf * Matrix::Identity(n, n), u);

  ChannelYields y;
  Eigen::ComplexEigenSolver<Matrix> es(u);
  if (es.info() == Eigen::Success) {
    Matrix v = es.eigenvectors();
    for (Eigen::Index c = 0; c < v.cols(); ++c) v.col(c).normalize();
    const Matrix vinv = v.partialPivLu().inverse();
    const double cond = one_norm(v) * one_norm(vinv);
    if (std::isfinite(cond) && cond < 1e8) {
      y.singlet = eigen_sum(qs, v, vinv, es.eigenvalues(), rho0);
      y.forward = eigen_sum(qf, v, vinv, es.eigenvalues(), rho0);
      return y;
    }
  }
  y.singlet = geometric_trace_sum(qs, u, rho0);
  y.forward = geometric_trace_sum(qf, u, rho0);
  return y;
}

}  // namespace drp
