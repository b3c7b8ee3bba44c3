#include "drp/spin_core.hpp"

#include <cmath>
#include <numeric>

namespace drp {

SpinTriple spin_operators(double s) {
  const double two_s = 2.0 * s;
  if (!(two_s >= 0.0) || std::abs(two_s - std::round(two_s)) > 1e-12) {
    throw InvalidArgument("spin quantum number must be a non-negative multiple of 1/2, got " +
                          std::to_string(s));
  }
  const int dim = static_cast<int>(std::round(two_s)) + 1;
  s = 0.5 * (dim - 1);

  // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>, basis ordered m = s, s-1, ..., -s.
  Matrix plus = Matrix::Zero(dim, dim);
  Matrix z = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const double m = s - k;
    z(k, k) = m;
    if (k > 0) plus(k - 1, k) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  Matrix minus = plus.adjoint();
  SpinTriple out;
  out.x = 0.5 * (plus + minus);
  out.y = cplx(0.0, -0.5) * (plus - minus);
  out.z = std::move(z);
  return out;
}

HilbertLayout::HilbertLayout(std::vector<int> nuclear_dims_a, std::vector<int> nuclear_dims_b)
    : n_a_(static_cast<int>(nuclear_dims_a.size())) {
  dims_ = {2, 2};
  for (int d : nuclear_dims_a) {
    if (d < 1) throw InvalidArgument("nuclear dimension must be positive");
    dims_.push_back(d);
    za_ *= d;
  }
  for (int d : nuclear_dims_b) {
    if (d < 1) throw InvalidArgument("nuclear dimension must be positive");
    dims_.push_back(d);
    zb_ *= d;
  }
}

int HilbertLayout::site_dim(int site) const {
  if (site < 0 || site >= site_count()) {
    throw InvalidArgument("site index " + std::to_string(site) + " out of range");
  }
  return dims_[site];
}

int HilbertLayout::nucleus_count(int radical) const {
  if (radical == 0) return n_a_;
  if (radical == 1) return site_count() - 2 - n_a_;
  throw InvalidArgument("radical index must be 0 or 1");
}

int HilbertLayout::nucleus_site(int radical, int j) const {
  if (j < 0 || j >= nucleus_count(radical)) {
    throw InvalidArgument("nucleus index " + std::to_string(j) + " out of range");
  }
  return 2 + (radical == 0 ? 0 : n_a_) + j;
}

SpinOperator embed(const Matrix& op, int site, const HilbertLayout& layout) {
  const int d = layout.site_dim(site);
  if (op.rows() != d || op.cols() != d) {
    throw DimensionMismatch("operator of dim " + std::to_string(op.rows()) +
                            " does not match site dim " + std::to_string(d));
  }
  const auto& dims = layout.dims();
  const int left = std::accumulate(dims.begin(), dims.begin() + site, 1, std::multiplies<>());
  const int right =
      std::accumulate(dims.begin() + site + 1, dims.end(), 1, std::multiplies<>());
  const int n = left * d * right;
  SpinOperator out = SpinOperator::Zero(n, n);
  // (I_left (x) op (x) I_right)
  for (int l = 0; l < left; ++l) {
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        const cplx v = op(a, b);
        if (v == cplx(0.0)) continue;
        const int row0 = (l * d + a) * right;
        const int col0 = (l * d + b) * right;
        for (int r = 0; r < right; ++r) out(row0 + r, col0 + r) = v;
      }
    }
  }
  return out;
}

SpinOperator embed_electronic(const Matrix4& op, const HilbertLayout& layout) {
  const int z = layout.nuclear_dim();
  SpinOperator out = SpinOperator::Zero(4 * z, 4 * z);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (op(a, b) != cplx(0.0))
        out.block(a * z, b * z, z, z).diagonal().setConstant(op(a, b));
  return out;
}

void apply_electronic(const Matrix4& op, int nuclear_dim, Eigen::Ref<Matrix> x) {
  const int z = nuclear_dim;
  if (x.rows() != 4 * z) throw DimensionMismatch("apply_electronic: row count mismatch");
  const Eigen::Index cols = x.cols();
  Matrix tmp(4 * z, cols);
  for (int a = 0; a < 4; ++a) {
    auto dst = tmp.middleRows(a * z, z);
    dst.noalias() = op(a, 0) * x.middleRows(0, z);
    for (int b = 1; b < 4; ++b) {
      if (op(a, b) != cplx(0.0)) dst.noalias() += op(a, b) * x.middleRows(b * z, z);
    }
  }
  x = tmp;
}

SpinTriple electron_spin(int which) {
  static const HilbertLayout electrons;
  const SpinTriple half = spin_operators(0.5);
  return {embed(half.x, which, electrons), embed(half.y, which, electrons),
          embed(half.z, which, electrons)};
}

Matrix4 electron_singlet_projector() {
  const SpinTriple a = electron_spin(0);
  const SpinTriple b = electron_spin(1);
  Matrix4 dot = a.x * b.x + a.y * b.y + a.z * b.z;
  return 0.25 * Matrix4::Identity() - dot;
}

SpinOperator singlet_projector(const HilbertLayout& layout) {
  return embed_electronic(electron_singlet_projector(), layout);
}

Matrix4 trace_out_nuclei(const Matrix& rho, int nuclear_dim) {
  const int z = nuclear_dim;
  if (rho.rows() != 4 * z || rho.cols() != 4 * z) {
    throw DimensionMismatch("trace_out_nuclei: density does not match nuclear dimension");
  }
  Matrix4 sigma;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) sigma(a, b) = rho.block(a * z, b * z, z, z).trace();
  return sigma;
}

Matrix4 trace_out_nuclei_pure(const Matrix& psi, int nuclear_dim, double scale) {
  const int z = nuclear_dim;
  if (psi.rows() != 4 * z) throw DimensionMismatch("trace_out_nuclei_pure: row mismatch");
  Matrix4 sigma;
  for (int a = 0; a < 4; ++a) {
    for (int b = a; b < 4; ++b) {
      // Frobenius inner product of row blocks a and b
      const cplx v = (psi.middleRows(a * z, z).array() * psi.middleRows(b * z, z).conjugate().array()).sum();
      sigma(a, b) = scale * v;
      sigma(b, a) = std::conj(sigma(a, b));
    }
  }
  return sigma;
}

Matrix4 st_basis_transform() {
  const double r = 1.0 / std::sqrt(2.0);
  Matrix4 u = Matrix4::Zero();
  u(0, 0) = 1.0;                 // T+ = |uu>
  u(1, 1) = r;                   // T0 = (|ud> + |du>)/sqrt2
  u(2, 1) = r;
  u(3, 2) = 1.0;                 // T- = |dd>
  u(1, 3) = r;                   // S  = (|ud> - |du>)/sqrt2
  u(2, 3) = -r;
  return u;
}

}  // namespace drp
