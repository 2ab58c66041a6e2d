#include "aeroflex/rotation.hpp"

#include <Eigen/Geometry>

namespace aeroflex {

Mat3 rotation_from_rotvec(const Vec3& psi) {
  if (psi.norm() >= 2.0 * kPi) {
    throw ParameterizationError(
        "rotation vector norm " + std::to_string(psi.norm()) +
        " is outside the valid range [0, 2*pi)");
  }
  return rodrigues<double>(psi);
}

Vec3 rotvec_from_rotation(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

Vec3 compose_rotvec(const Vec3& psi, const Vec3& increment) {
  return rotvec_from_rotation(rodrigues<double>(increment) *
                              rodrigues<double>(psi));
}

}  // namespace aeroflex
