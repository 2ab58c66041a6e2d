#pragma once

#include <cmath>

#include "aeroflex/types.hpp"

#include <unsupported/Eigen/AutoDiff>

namespace aeroflex {

inline double scalar_value(double x) { return x; }

template <typename Der>
double scalar_value(const Eigen::AutoDiffScalar<Der>& x) {
  return scalar_value(x.value());
}

template <typename Scalar>
Matrix3<Scalar> skew(const Vector3<Scalar>& v) {
  Matrix3<Scalar> m;
  m << Scalar(0), -v(2), v(1),
       v(2), Scalar(0), -v(0),
       -v(1), v(0), Scalar(0);
  return m;
}

/// Coefficients of the Rodrigues expansions as functions of theta^2:
/// a = sin(t)/t, b = (1 - cos t)/t^2, c = (t - sin t)/t^3.
/// Below theta = 1e-2 a truncated Taylor series in theta^2 is used; it is
/// exact to machine precision there and keeps derivatives finite at zero.
template <typename Scalar>
void rodrigues_coefficients(const Scalar& theta2, Scalar& a, Scalar& b,
                            Scalar& c) {
  using std::sin;
  using std::sqrt;
  if (scalar_value(theta2) < 1e-4) {
    const Scalar t2 = theta2;
    const Scalar t4 = t2 * t2;
    const Scalar t6 = t4 * t2;
    const Scalar t8 = t4 * t4;
    a = Scalar(1.0) - t2 / 6.0 + t4 / 120.0 - t6 / 5040.0 + t8 / 362880.0;
    b = Scalar(0.5) - t2 / 24.0 + t4 / 720.0 - t6 / 40320.0 + t8 / 3628800.0;
    c = Scalar(1.0 / 6.0) - t2 / 120.0 + t4 / 5040.0 - t6 / 362880.0 +
        t8 / 39916800.0;
  } else {
    const Scalar t = sqrt(theta2);
    const Scalar s = sin(t);
    const Scalar h = sin(t * Scalar(0.5));
    a = s / t;
    b = Scalar(2.0) * h * h / theta2;
    c = (t - s) / (theta2 * t);
  }
}

/// Rotation matrix of a Cartesian rotation vector (Rodrigues formula).
/// No range check; see rotation_from_rotvec for the checked entry point.
template <typename Scalar>
Matrix3<Scalar> rodrigues(const Vector3<Scalar>& psi) {
  Scalar a, b, c;
  rodrigues_coefficients<Scalar>(psi.squaredNorm(), a, b, c);
  const Matrix3<Scalar> k = skew<Scalar>(psi);
  Matrix3<Scalar> r = k * a + (k * k) * b;
  for (int i = 0; i < 3; ++i) r(i, i) += Scalar(1.0);
  return r;
}

/// Spatial tangent operator T(psi): the angular velocity of the rotated
/// frame is T(psi) * psi_dot, and R' R^T = skew(T(psi) psi').
template <typename Scalar>
Matrix3<Scalar> tangent_operator(const Vector3<Scalar>& psi) {
  Scalar a, b, c;
  rodrigues_coefficients<Scalar>(psi.squaredNorm(), a, b, c);
  const Matrix3<Scalar> k = skew<Scalar>(psi);
  Matrix3<Scalar> t = k * b + (k * k) * c;
  for (int i = 0; i < 3; ++i) t(i, i) += Scalar(1.0);
  return t;
}

/// Checked Rodrigues map; throws ParameterizationError for |psi| >= 2 pi.
Mat3 rotation_from_rotvec(const Vec3& psi);

/// Rotation vector of a rotation matrix, |psi| <= pi.
Vec3 rotvec_from_rotation(const Mat3& r);

/// Composes an incremental spatial rotation onto psi and re-extracts the
/// total rotation vector.
Vec3 compose_rotvec(const Vec3& psi, const Vec3& increment);

}  // namespace aeroflex
