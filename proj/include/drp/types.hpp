#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace drp {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Matrix4 = Eigen::Matrix4cd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Dense complex operator on a spin Hilbert space. Angular-frequency units
/// (rad/us) attach once an operator is used as a Hamiltonian term.
using SpinOperator = Matrix;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: spins, ranges, unknown names, malformed files.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Numerical failure the caller may recover from (ill-conditioned Floquet
/// basis, non-converged trajectory).
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace drp
