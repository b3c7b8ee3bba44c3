#pragma once

#include <vector>

#include "drp/types.hpp"

namespace drp {

struct SpinTriple {
  Matrix x;
  Matrix y;
  Matrix z;
};

/// Angular momentum operators for spin quantum number `s` (0, 1/2, 1, ...),
/// with Sz = diag(s, s-1, ..., -s). Throws InvalidArgument when 2s is not a
/// non-negative integer.
SpinTriple spin_operators(double s);

/// Tensor-product layout of the radical pair Hilbert space.
///
/// Factor order is fixed: electron A, electron B, nuclei of radical A in
/// declaration order, nuclei of radical B in declaration order. Every builder
/// in the library relies on this order, so electron-only operators are
/// always of the form E (x) I_Z with E a 4x4 matrix.
class HilbertLayout {
 public:
  HilbertLayout() : HilbertLayout({}, {}) {}
  HilbertLayout(std::vector<int> nuclear_dims_a, std::vector<int> nuclear_dims_b);

  int site_count() const { return static_cast<int>(dims_.size()); }
  int site_dim(int site) const;
  const std::vector<int>& dims() const { return dims_; }

  /// Site index of nucleus `j` on radical `radical` (0 = A, 1 = B).
  int nucleus_site(int radical, int j) const;
  int nucleus_count(int radical) const;

  int za() const { return za_; }
  int zb() const { return zb_; }
  /// Z = Z_A * Z_B, the nuclear subspace dimension.
  int nuclear_dim() const { return za_ * zb_; }
  int total_dim() const { return 4 * za_ * zb_; }

  bool operator==(const HilbertLayout&) const = default;

 private:
  std::vector<int> dims_;
  int n_a_ = 0;
  int za_ = 1;
  int zb_ = 1;
};

/// Lift `op` acting on `site` to the full space (identity elsewhere).
SpinOperator embed(const Matrix& op, int site, const HilbertLayout& layout);

/// E (x) I_Z for a 4x4 electronic operator E.
SpinOperator embed_electronic(const Matrix4& op, const HilbertLayout& layout);

/// In place x <- (E (x) I_Z) x for x with total_dim rows. Costs O(16 Z cols).
void apply_electronic(const Matrix4& op, int nuclear_dim, Eigen::Ref<Matrix> x);

/// Spin-1/2 operators of electron A and B on the 4-dim electron space.
SpinTriple electron_spin(int which);

/// P_S on the 4-dim electron space (up/down product basis).
Matrix4 electron_singlet_projector();

/// P_S = (1/4 - S_A.S_B) (x) I_nuclear.
SpinOperator singlet_projector(const HilbertLayout& layout);

/// Tr_nuc(rho) for rho on the full space (electron factors first).
Matrix4 trace_out_nuclei(const Matrix& rho, int nuclear_dim);

/// Tr_nuc(psi psi^dagger) * scale, for an ensemble of column states.
Matrix4 trace_out_nuclei_pure(const Matrix& psi, int nuclear_dim, double scale = 1.0);

/// Unitary whose columns are |T+>, |T0>, |T->, |S> expressed in the product
/// basis (|uu>, |ud>, |du>, |dd>).
Matrix4 st_basis_transform();

}  // namespace drp
