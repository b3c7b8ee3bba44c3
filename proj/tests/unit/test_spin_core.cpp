#include <doctest.h>

#include "drp/models.hpp"
#include "drp/spin_core.hpp"

using namespace drp;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("spin-1/2 operators are half the Pauli matrices") {
  const auto s = spin_operators(0.5);
  Matrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -kI, kI, 0;
  sz << 1, 0, 0, -1;
  CHECK(max_abs(s.x - 0.5 * sx) < 1e-15);
  CHECK(max_abs(s.y - 0.5 * sy) < 1e-15);
  CHECK(max_abs(s.z - 0.5 * sz) < 1e-15);
}

TEST_CASE("spin-1 Sz is diag(1, 0, -1)") {
  const auto s = spin_operators(1.0);
  CHECK(s.z.rows() == 3);
  CHECK(s.z(0, 0).real() == doctest::Approx(1.0));
  CHECK(std::abs(s.z(1, 1)) < 1e-15);
  CHECK(s.z(2, 2).real() == doctest::Approx(-1.0));
}

TEST_CASE("commutation relations hold for s up to 2") {
  for (double spin : {0.5, 1.0, 1.5, 2.0}) {
    CAPTURE(spin);
    const auto s = spin_operators(spin);
    CHECK(max_abs(s.x * s.y - s.y * s.x - kI * s.z) < 1e-13);
    CHECK(max_abs(s.y * s.z - s.z * s.y - kI * s.x) < 1e-13);
    CHECK(max_abs(s.z * s.x - s.x * s.z - kI * s.y) < 1e-13);
    CHECK(max_abs(s.x - s.x.adjoint()) < 1e-15);
    CHECK(max_abs(s.y - s.y.adjoint()) < 1e-15);
    // S^2 = s(s+1)
    const Matrix s2 = s.x * s.x + s.y * s.y + s.z * s.z;
    CHECK(max_abs(s2 - spin * (spin + 1) * Matrix::Identity(s2.rows(), s2.cols())) < 1e-13);
  }
}

TEST_CASE("invalid spins are rejected") {
  CHECK_THROWS_AS(spin_operators(0.3), InvalidArgument);
  CHECK_THROWS_AS(spin_operators(-0.5), InvalidArgument);
}

TEST_CASE("layout dimensions follow the factor order") {
  const HilbertLayout l({3, 3}, {3, 2});
  CHECK(l.za() == 9);
  CHECK(l.zb() == 6);
  CHECK(l.nuclear_dim() == 54);
  CHECK(l.total_dim() == 216);
  CHECK(l.site_dim(0) == 2);
  CHECK(l.site_dim(1) == 2);
  CHECK(l.nucleus_site(1, 1) == 5);
  CHECK(preset_system("fad_trp_4spin").layout() == l);
}

TEST_CASE("embedding") {
  const HilbertLayout l({3}, {2});
  const auto se = spin_operators(0.5);
  const auto sn = spin_operators(1.0);
  const Matrix a = embed(se.z, 0, l);
  const Matrix b = embed(sn.x, 2, l);
  CHECK(a.rows() == l.total_dim());
  SUBCASE("operators on different sites commute") { CHECK(max_abs(a * b - b * a) < 1e-14); }
  SUBCASE("trace scales with the complementary dimension") {
    const Matrix c = embed(sn.z * sn.z, 2, l);
    CHECK(std::abs(c.trace() - (sn.z * sn.z).trace() * double(l.total_dim() / 3)) < 1e-12);
  }
  SUBCASE("hermiticity and spectral norm are preserved") {
    CHECK(max_abs(b - b.adjoint()) < 1e-15);
    Eigen::SelfAdjointEigenSolver<Matrix> e1(sn.x), e2(b);
    CHECK(e2.eigenvalues().cwiseAbs().maxCoeff() == doctest::Approx(e1.eigenvalues().cwiseAbs().maxCoeff()));
  }
  SUBCASE("electron A on a bare pair") {
    const Matrix z = embed(se.z, 0, HilbertLayout());
    CHECK(z.rows() == 4);
    CHECK(z(0, 0).real() == doctest::Approx(0.5));
    CHECK(z(2, 2).real() == doctest::Approx(-0.5));
  }
  CHECK_THROWS(embed(se.z, 7, l));
  CHECK_THROWS(embed(sn.z, 0, l));
}

TEST_CASE("singlet projector") {
  SUBCASE("bare pair") {
    const Matrix p = singlet_projector(HilbertLayout());
    Vector s = Vector::Zero(4), t0 = Vector::Zero(4);
    s(1) = 1 / std::sqrt(2.0);
    s(2) = -1 / std::sqrt(2.0);
    t0(1) = t0(2) = 1 / std::sqrt(2.0);
    CHECK((p * s - s).norm() < 1e-14);
    CHECK((p * t0).norm() < 1e-14);
  }
  const HilbertLayout l({3, 3}, {3, 2});
  const Matrix p = singlet_projector(l);
  CHECK(max_abs(p * p - p) < 1e-14);
  CHECK(max_abs(p - p.adjoint()) < 1e-15);
  CHECK(std::abs(p.trace() - 54.0) < 1e-12);
  const Matrix nuc = embed(spin_operators(1.0).x, 3, l);
  CHECK(max_abs(p * nuc - nuc * p) < 1e-14);
}

TEST_CASE("singlet-triplet basis transform") {
  const Matrix4 u = st_basis_transform();
  CHECK(std::abs(u(0, 0) - 1.0) < 1e-15);
  CHECK(max_abs(u.adjoint() * u - Matrix4::Identity()) < 1e-15);
  const Matrix4 p = u.adjoint() * electron_singlet_projector() * u;
  Matrix4 expected = Matrix4::Zero();
  expected(3, 3) = 1.0;
  CHECK(max_abs(p - expected) < 1e-15);
}

TEST_CASE("partial trace over nuclei") {
  const HilbertLayout l({3}, {});
  const Matrix p = singlet_projector(l) / 3.0;
  const Matrix4 sigma = trace_out_nuclei(p, 3);
  CHECK(max_abs(sigma - electron_singlet_projector()) < 1e-14);
}
