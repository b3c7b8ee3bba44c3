#pragma once

#include <array>
#include <string>
#include <vector>

#include "drp/spin_core.hpp"

namespace drp {

/// 3x3 hyperfine coupling tensor in mT.
struct HyperfineTensor {
  Mat3 matrix = Mat3::Zero();

  static HyperfineTensor axial(double perp_mt, double par_mt);
  bool is_symmetric(double tol = 1e-12) const;
};

struct Nucleus {
  std::string label;
  double spin = 1.0;
  HyperfineTensor tensor;
};

/// Two radicals with their hyperfine-coupled nuclei. Radical A is the flavin
/// side, B the tryptophan side.
struct SpinSystem {
  std::string name;
  std::array<std::vector<Nucleus>, 2> radicals;
  /// Position of radical B relative to radical A, Angstrom.
  Vec3 displacement{8.51, -14.25, 6.55};

  HilbertLayout layout() const;
  void validate() const;
  /// Rotate every tensor and the displacement vector by R.
  SpinSystem rotated(const Mat3& rotation) const;
};

}  // namespace drp
