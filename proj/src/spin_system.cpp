#include "drp/spin_system.hpp"

#include <cmath>

namespace drp {

HyperfineTensor HyperfineTensor::axial(double perp_mt, double par_mt) {
  HyperfineTensor t;
  t.matrix.diagonal() << perp_mt, perp_mt, par_mt;
  return t;
}

bool HyperfineTensor::is_symmetric(double tol) const {
  return (matrix - matrix.transpose()).cwiseAbs().maxCoeff() <= tol;
}

HilbertLayout SpinSystem::layout() const {
  std::array<std::vector<int>, 2> dims;
  for (int r = 0; r < 2; ++r) {
    for (const auto& n : radicals[r]) dims[r].push_back(static_cast<int>(std::lround(2 * n.spin)) + 1);
  }
  return HilbertLayout(dims[0], dims[1]);
}

void SpinSystem::validate() const {
  for (const auto& radical : radicals) {
    for (const auto& n : radical) {
      const double two_s = 2.0 * n.spin;
      if (!(n.spin > 0.0) || n.spin > 2.0 || std::abs(two_s - std::round(two_s)) > 1e-12) {
        throw InvalidArgument("nucleus " + n.label + ": unsupported spin " + std::to_string(n.spin));
      }
      if (!n.tensor.is_symmetric()) {
        throw InvalidArgument("nucleus " + n.label + ": hyperfine tensor is not symmetric");
      }
      if (!n.tensor.matrix.allFinite()) {
        throw InvalidArgument("nucleus " + n.label + ": non-finite hyperfine tensor");
      }
    }
  }
  if (!displacement.allFinite()) throw InvalidArgument("non-finite radical displacement");
}

SpinSystem SpinSystem::rotated(const Mat3& rotation) const {
  SpinSystem out = *this;
  for (auto& radical : out.radicals)
    for (auto& n : radical) n.tensor.matrix = rotation * n.tensor.matrix * rotation.transpose();
  out.displacement = rotation * displacement;
  return out;
}

}  // namespace drp
