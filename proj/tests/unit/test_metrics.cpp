#include <doctest.h>

#include <random>

#include "drp/metrics.hpp"
#include "drp/models.hpp"

using namespace drp;

namespace {

Matrix4 ket_bra(const Eigen::Vector4cd& v) { return v * v.adjoint(); }

Eigen::Vector4cd ud(int i) {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  v(i) = 1.0;
  return v;
}

Eigen::Vector4cd singlet_ket() {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  v(1) = 1 / std::sqrt(2.0);
  v(2) = -1 / std::sqrt(2.0);
  return v;
}

Matrix4 werner(double p) { return p * ket_bra(singlet_ket()) + (1 - p) * Matrix4::Identity() / 4.0; }

Matrix4 random_state(std::mt19937& rng, int rank = 4) {
  std::normal_distribution<double> n01;
  Eigen::Matrix<cplx, 4, Eigen::Dynamic> a(4, rank);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < rank; ++j) a(i, j) = cplx(n01(rng), n01(rng));
  Matrix4 r = a * a.adjoint();
  return r / r.trace().real();
}

Eigen::Vector2cd random_qubit(std::mt19937& rng) {
  std::normal_distribution<double> n01;
  Eigen::Vector2cd v(cplx(n01(rng), n01(rng)), cplx(n01(rng), n01(rng)));
  return v.normalized();
}

// Exact infinite-horizon singlet yield kb Tr(P_S X), with X solving
// -i Heff X + i X Heff^dag = -rho0, by dense vectorisation.
double lyapunov_yield(const Matrix& heff, const Matrix& ps, const Matrix& rho0, double kb) {
  const int n = static_cast<int>(heff.rows());
  const Matrix id = Matrix::Identity(n, n);
  Matrix l = Matrix::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      l.block(i * n, j * n, n, n) += -kI * id(i, j) * heff;            // I (x) Heff
      l.block(i * n, j * n, n, n) += kI * std::conj(heff(i, j)) * id;  // conj(Heff) (x) I
    }
  const Vector rhs = -Eigen::Map<const Vector>(rho0.data(), n * n);
  const Vector x = l.partialPivLu().solve(rhs);
  const Matrix xm = Eigen::Map<const Matrix>(x.data(), n, n);
  return kb * (ps * xm).trace().real();
}

}  // namespace

TEST_CASE("measure exactness on basis states") {
  const Matrix4 s = ket_bra(singlet_ket());
  const Matrix4 updown = ket_bra(ud(1));
  const Matrix4 upup = ket_bra(ud(0));
  const Matrix4 mixed = Matrix4::Identity() / 4.0;

  CHECK(std::abs(concurrence(s) - 1.0) < 1e-10);
  CHECK(std::abs(log_negativity(s) - 1.0) < 1e-10);
  CHECK(std::abs(concurrence(upup)) < 1e-10);
  CHECK(std::abs(log_negativity(upup)) < 1e-10);

  CHECK(std::abs(coherence_relative_entropy(s, Basis::ST)) < 1e-10);
  CHECK(std::abs(coherence_relative_entropy(updown, Basis::ST) - 1.0) < 1e-10);
  CHECK(std::abs(coherence_relative_entropy(mixed, Basis::UD)) < 1e-10);
  CHECK(std::abs(coherence_relative_entropy(mixed, Basis::ST)) < 1e-10);

  CHECK(std::abs(coherence_l1(s, Basis::UD) - 1.0) < 1e-10);
  CHECK(std::abs(coherence_l1(updown, Basis::UD)) < 1e-10);
  const Eigen::Vector4cd plus = Eigen::Vector4cd::Constant(0.5);
  CHECK(std::abs(coherence_l1(ket_bra(plus), Basis::UD) - 3.0) < 1e-10);

  CHECK(std::abs(coherence_st(updown) - 1.0) < 1e-10);
  CHECK(std::abs(coherence_st(s)) < 1e-10);

  CHECK(std::abs(coherence_basis_independent(mixed)) < 1e-10);
  CHECK(std::abs(coherence_basis_independent(updown) - 2.0) < 1e-10);
  CHECK(std::abs(coherence_basis_independent(ket_bra(plus)) - 2.0) < 1e-10);
  const Matrix4 rank2 = 0.5 * (ket_bra(ud(0)) + ket_bra(ud(3)));
  CHECK(std::abs(coherence_basis_independent(rank2) - 1.0) < 1e-10);
}

TEST_CASE("triplet coherences do not count for C_st") {
  const Matrix4 u = st_basis_transform();
  Eigen::Vector4cd v;
  v << 0.6, cplx(0.0, 0.48), -0.64, 0.0;  // T+, T0, T- superposition, no S part
  const Eigen::Vector4cd psi = u * v.normalized();
  CHECK(std::abs(coherence_st(ket_bra(psi))) < 1e-10);
  CHECK(coherence_relative_entropy(ket_bra(psi), Basis::ST) > 0.5);
}

TEST_CASE("Werner states against closed forms") {
  for (double p : {0.1, 1.0 / 3.0, 0.5, 0.8, 1.0}) {
    CAPTURE(p);
    const double c = std::max(0.0, (3 * p - 1) / 2);
    CHECK(std::abs(concurrence(werner(p)) - c) < 1e-8);
    // partial transpose has one eigenvalue (1 - 3p)/4, so ||.||_1 = 1 + c
    CHECK(std::abs(log_negativity(werner(p)) - std::log2(1 + c)) < 1e-8);
  }
  CHECK(std::abs(concurrence(werner(0.5)) - 0.25) < 1e-8);
  CHECK(std::abs(log_negativity(werner(0.5)) - 0.32192809488736235) < 1e-8);
}

TEST_CASE("measures renormalise sub-normalised input") {
  const Matrix4 s = ket_bra(singlet_ket());
  for (auto m : {MeasureId::Cr, MeasureId::Cl1, MeasureId::Cst, MeasureId::C1, MeasureId::Concurrence,
                 MeasureId::LogNegativity}) {
    CHECK(evaluate_measure(m, 0.3 * s, Basis::UD) == doctest::Approx(evaluate_measure(m, s, Basis::UD)));
    CHECK(evaluate_measure(m, Matrix4::Zero()) == 0.0);
  }
}

TEST_CASE("random-state properties") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix4 r = random_state(rng, 1 + trial % 4);
    CHECK(coherence_st(r) <= coherence_relative_entropy(r, Basis::ST) + 1e-10);
    for (auto m : {MeasureId::Cr, MeasureId::Cl1, MeasureId::Cst, MeasureId::C1, MeasureId::Concurrence,
                   MeasureId::LogNegativity})
      CHECK(evaluate_measure(m, r, Basis::ST) >= -1e-10);
    // global phase on a pure state changes nothing
    CHECK(coherence_basis_independent(r) <= 2.0 + 1e-10);
  }
  for (int trial = 0; trial < 30; ++trial) {
    // separable: mixture of products
    Matrix4 sep = Matrix4::Zero();
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2cd a = random_qubit(rng), b = random_qubit(rng);
      Eigen::Vector4cd ab;
      ab << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
      sep += ket_bra(ab) / 3.0;
    }
    CHECK(concurrence(sep) < 1e-8);
    CHECK(log_negativity(sep) < 1e-8);
  }
}

TEST_CASE("reduction over nuclei") {
  std::mt19937 rng(3);
  const Matrix4 e = random_state(rng);
  Matrix n = Matrix::Zero(3, 3);
  n(0, 0) = 0.2;
  n(1, 1) = 0.5;
  n(2, 2) = 0.3;
  n(0, 2) = n(2, 0) = 0.1;
  Matrix rho(12, 12);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) rho.block(3 * i, 3 * j, 3, 3) = e(i, j) * n;
  const auto r = reduce_electronic(rho, 3);
  CHECK((r.sigma - e).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(r.trace_weight == doctest::Approx(1.0));
  CHECK((reduce_electronic(Matrix(e), 1).sigma - e).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS(reduce_electronic(Matrix::Identity(10, 10), 3));
}

TEST_CASE("time integration") {
  const double k = 0.8, c = 0.37;
  std::vector<double> t, v, w;
  for (int i = 0; i <= 12000; ++i) {
    t.push_back(i * 0.001);
    v.push_back(c);
    w.push_back(std::exp(-k * t.back()));
  }
  CHECK(time_integrate_measure(t, v, w, 5.0) == doctest::Approx(c * (1 - std::exp(-5 * k)) / k).epsilon(1e-7));
  std::vector<double> zero(t.size(), 0.0);
  CHECK(time_integrate_measure(t, zero, w, 5.0) == 0.0);
  CHECK_THROWS_AS(time_integrate_measure(t, v, {1.0}, 5.0), DimensionMismatch);
}

TEST_CASE("time-integrated measure converges in dt") {
  SimulationSetup s;
  s.system = preset_system("one_nitrogen");
  s.j0_mhz = 5.0;
  s.field.direction = Vec3::UnitX();
  const EffectiveHamiltonianSampler sampler(s);
  auto integral = [&](double dt) {
    DirectOptions o;
    o.t_max = 5.0;
    o.dt = dt;
    o.store = StoreStates::Electronic;
    return time_integrate_measure(measure_series(direct_evolve(sampler, o), MeasureId::Cr), 5.0);
  };
  CHECK(std::abs(integral(0.0005) - integral(0.00025)) < 1e-6);
}

TEST_CASE("orientation combinations") {
  CHECK(orientation_average(1.0, 3.0) == 2.0);
  CHECK(orientation_difference(1.0, 3.0) == 2.0);
  CHECK(orientation_difference(0.4, 0.4) == 0.0);
}

TEST_CASE("global l1 coherence") {
  Matrix d = Matrix::Zero(12, 12);
  d.diagonal().setConstant(1.0 / 12);
  CHECK(global_l1(d, Basis::UD, 3) == 0.0);
  const Matrix ps = singlet_projector(HilbertLayout({3}, {})) / 3.0;
  CHECK(global_l1(ps, Basis::UD, 3) == doctest::Approx(1.0));
  CHECK(std::abs(global_l1(ps, Basis::ST, 3)) < 1e-12);
  Vector plus = Vector::Constant(12, 1.0 / std::sqrt(12.0));
  CHECK(global_l1(plus * plus.adjoint(), Basis::UD, 3) == doctest::Approx(11.0));
}

TEST_CASE("global coherent yield") {
  // no nuclei: H = 0, the eigenbasis is the up/down basis and GC(P_S) keeps
  // the -1/2 coherences, Tr(P_S GC) = 1/2, times kb / (kb + kf)
  SimulationSetup bare;
  CHECK(global_coherent_yield(bare) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));

  SimulationSetup s;
  s.system = preset_system("one_nitrogen");
  const double y = global_coherent_yield(s);
  CHECK(y > 1e-3);

  // dense oracle at B = 0
  const HilbertLayout l = s.system.layout();
  const Matrix hf = hyperfine(s.system, l);
  Eigen::SelfAdjointEigenSolver<Matrix> es(hf);
  const Matrix w = es.eigenvectors();
  const Matrix ps = singlet_projector(l);
  Matrix p = w.adjoint() * ps * w;
  p.diagonal().setZero();
  const Matrix rho0 = w * p * w.adjoint() / 3.0;
  const Matrix heff = assemble_effective(hf, ps, 2.0, 1.0);
  CHECK(y == doctest::Approx(std::abs(lyapunov_yield(heff, ps, rho0, 2.0))).epsilon(1e-8));
}

TEST_CASE("static yield against the Lyapunov oracle") {
  SimulationSetup s;
  s.system = preset_system("one_nitrogen");
  s.j0_mhz = 6.0;
  s.include_eed = true;
  s.field.direction = Vec3(0.3, 0.1, -0.9).normalized();
  const EffectiveHamiltonianSampler sampler(s);
  const Matrix rho0 = sampler.singlet() / 3.0;
  const double oracle = lyapunov_yield(sampler.effective(0.0), sampler.singlet(), rho0, 2.0);
  CHECK(compute_yield(s).phi_singlet == doctest::Approx(oracle).epsilon(1e-10));
}
