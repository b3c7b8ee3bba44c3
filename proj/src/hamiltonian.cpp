#include "drp/hamiltonian.hpp"

#include <cmath>

namespace drp {

double mt_to_mhz(double mt, const PhysicalConstants& c) { return mt * c.gamma_mhz_per_mt(); }
double mhz_to_mt(double mhz, const PhysicalConstants& c) { return mhz / c.gamma_mhz_per_mt(); }
double mt_to_angular(double mt, const PhysicalConstants& c) {
  return mhz_to_angular(mt_to_mhz(mt, c));
}

void FieldConfig::validate() const {
  if (!(magnitude_mt >= 0.0) || !std::isfinite(magnitude_mt)) {
    throw InvalidArgument("field magnitude must be finite and non-negative");
  }
  if (std::abs(direction.norm() - 1.0) > 1e-12) {
    throw InvalidArgument("field direction must be a unit vector");
  }
}

void RateModel::validate() const {
  if (!(kb0 >= 0.0) || !(kf >= 0.0) || !(beta >= 0.0)) {
    throw InvalidArgument("rate constants and beta must be non-negative");
  }
}

double larmor_angular(double field_mt, const PhysicalConstants& c) {
  return mt_to_angular(field_mt, c);
}

SpinOperator zeeman(const FieldConfig& field, const HilbertLayout& layout,
                    const PhysicalConstants& c) {
  field.validate();
  const double w0 = larmor_angular(field.magnitude_mt, c);
  Matrix4 h = Matrix4::Zero();
  for (int e = 0; e < 2; ++e) {
    const SpinTriple s = electron_spin(e);
    h += w0 * (field.direction.x() * s.x + field.direction.y() * s.y + field.direction.z() * s.z);
  }
  return embed_electronic(h, layout);
}

SpinOperator hyperfine(const SpinSystem& system, const HilbertLayout& layout,
                       const PhysicalConstants& c) {
  if (system.layout() != layout) {
    throw DimensionMismatch("hyperfine: spin system does not match layout");
  }
  const int n = layout.total_dim();
  SpinOperator h = SpinOperator::Zero(n, n);
  const SpinTriple half = spin_operators(0.5);
  for (int r = 0; r < 2; ++r) {
    const std::array<Matrix, 3> s = {embed(half.x, r, layout), embed(half.y, r, layout),
                                     embed(half.z, r, layout)};
    for (int j = 0; j < static_cast<int>(system.radicals[r].size()); ++j) {
      const Nucleus& nuc = system.radicals[r][j];
      const int site = layout.nucleus_site(r, j);
      const SpinTriple in = spin_operators(nuc.spin);
      const std::array<Matrix, 3> i = {embed(in.x, site, layout), embed(in.y, site, layout),
                                       embed(in.z, site, layout)};
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const double coupling = nuc.tensor.matrix(a, b);
          if (coupling == 0.0) continue;
          h.noalias() += mt_to_angular(coupling, c) * (s[a] * i[b]);
        }
      }
    }
  }
  return h;
}

namespace {

Matrix4 electron_dot() {
  const SpinTriple a = electron_spin(0);
  const SpinTriple b = electron_spin(1);
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

}  // namespace

Matrix4 exchange_electronic(double j_mhz) {
  return -2.0 * mhz_to_angular(j_mhz) * electron_dot();
}

SpinOperator exchange(double j_mhz, const HilbertLayout& layout) {
  return embed_electronic(exchange_electronic(j_mhz), layout);
}

double dipolar_coupling_angular(double r_angstrom, const PhysicalConstants& c) {
  if (!(r_angstrom > 0.0)) throw InvalidArgument("dipolar distance must be positive");
  const double r = r_angstrom * 1e-10;
  const double d = si::kVacuumPermeability * c.g_e * c.g_e * si::kBohrMagneton *
                   si::kBohrMagneton / (4.0 * kPi * si::kHbar * r * r * r);
  return d * 1e-6;  // rad/s -> rad/us
}

Matrix4 eed_electronic(const Vec3& r_angstrom, const PhysicalConstants& c) {
  const double r = r_angstrom.norm();
  if (!(r > 0.0)) throw InvalidArgument("eed: zero-length displacement");
  const Vec3 u = r_angstrom / r;
  const SpinTriple a = electron_spin(0);
  const SpinTriple b = electron_spin(1);
  const Matrix4 au = u.x() * a.x + u.y() * a.y + u.z() * a.z;
  const Matrix4 bu = u.x() * b.x + u.y() * b.y + u.z() * b.z;
  return -dipolar_coupling_angular(r, c) * (3.0 * au * bu - electron_dot());
}

SpinOperator eed(const Vec3& r_angstrom, const HilbertLayout& layout,
                 const PhysicalConstants& c) {
  return embed_electronic(eed_electronic(r_angstrom, c), layout);
}

SpinOperator assemble_effective(const SpinOperator& h, const SpinOperator& singlet, double kb,
                                double kf) {
  if (h.rows() != singlet.rows() || h.cols() != singlet.cols() || h.rows() != h.cols()) {
    throw DimensionMismatch("assemble_effective: dimension mismatch");
  }
  if (!(kb >= 0.0) || !(kf >= 0.0)) throw InvalidArgument("rates must be non-negative");
  SpinOperator out = h - kI * (0.5 * kb) * singlet;
  out.diagonal().array() -= kI * (0.5 * kf);
  return out;
}

}  // namespace drp
