#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pce {

using cplx = std::complex<double>;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using CVec3 = Eigen::Vector3cd;
using CMat3 = Eigen::Matrix3cd;
using CMat6 = Eigen::Matrix<cplx, 6, 6>;
using CVec6 = Eigen::Matrix<cplx, 6, 1>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

/// Integer coordinates of a dual-lattice vector in the dual basis.
using Index3 = std::array<int, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kI{0.0, 1.0};

/// Antisymmetric matrix v^x with v^x w = v x w.
inline Mat3 cross_matrix(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v(2), v(1),
       v(2), 0.0, -v(0),
       -v(1), v(0), 0.0;
  return m;
}

inline Index3 operator+(const Index3& a, const Index3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Index3 operator-(const Index3& a, const Index3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Index3 operator-(const Index3& a) { return {-a[0], -a[1], -a[2]}; }

// Error hierarchy. The CLI maps ConfigError to exit 2 and NumericalError /
// InvariantViolation to exit 3.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  enum class Kind { SingularLattice, IndefiniteGram, NoConvergence, RankDeficient, Isolation };

  NumericalError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// A documented invariant of an input does not hold; `invariant()` names it.
class InvariantViolation : public Error {
 public:
  InvariantViolation(std::string invariant, const std::string& what)
      : Error(invariant + ": " + what), invariant_(std::move(invariant)) {}
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

}  // namespace pce
