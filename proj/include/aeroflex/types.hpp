#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace aeroflex {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kGravity = 9.81;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rotation vector outside the range where the Rodrigues map is one-to-one.
class ParameterizationError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument value (negative stiffness scale, negative time, ...).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Singular reduced system, typically from missing boundary conditions.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// Flow state where an angle of attack cannot be defined.
class DegenerateFlowError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent vector or matrix sizes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace aeroflex
