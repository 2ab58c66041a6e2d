#pragma once

#include <vector>

#include "aeroflex/beam.hpp"
#include "aeroflex/types.hpp"

namespace aeroflex::rigid {

/// Body axes: x forward, y right, z down. Inertial axes: north, east, down.
struct RigidState {
  Vec3 V_B = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  Vec4 q = Vec4(1, 0, 0, 0);  // scalar first
  Vec3 p_cg = Vec3::Zero();
};

struct MassProperties {
  double m = 74.0;
  Mat3 J0 = Mat3::Identity();
  Mat3 dJ = Mat3::Zero();

  Mat3 J() const { return J0 + dJ; }
};

/// q_dot = 1/2 Omega(omega) q, i.e. 1/2 q (x) (0, omega).
Vec4 quat_rates(const Vec4& q, const Vec3& omega);

/// Attitude matrix of a unit quaternion. It maps body components to
/// inertial components, consistent with quat_rates taking body rates.
Mat3 quat_to_matrix(const Vec4& q);

/// Unit quaternion; throws RangeError for a (near) zero quaternion.
Vec4 normalize_quat(const Vec4& q);

/// Weight of mass m resolved in body axes.
Vec3 gravity_body(const Vec4& q, double m, double g = kGravity);

/// V_B_dot = sum(F) / m - omega x V_B, forces in body axes.
Vec3 translational_rates(const RigidState& state, const MassProperties& mass,
                         const Vec3& F_aero, const Vec3& F_grav,
                         const Vec3& F_thrust);

/// omega_dot = J^-1 (sum(M) - omega x J omega); throws for singular J.
Vec3 rotational_rates(const RigidState& state, const MassProperties& mass,
                      const Vec3& M_aero, const Vec3& M_thrust);

/// Inertia change of point masses at r0 displaced by u.
Mat3 inertia_correction(const std::vector<double>& masses,
                        const std::vector<Vec3>& r0,
                        const std::vector<Vec3>& u);

/// Inertia change of the deformed wing, element-midpoint quadrature.
Mat3 inertia_correction(const beam::BeamMesh& mesh,
                        const std::vector<beam::NodalState>& states);

/// Undeformed inertia of the wing about the body origin: line mass plus
/// sectional rotary inertia.
Mat3 wing_inertia(const beam::BeamMesh& mesh);

double wing_mass(const beam::BeamMesh& mesh);

/// Inertial CG velocity.
Vec3 cg_rates(const RigidState& state);

}  // namespace aeroflex::rigid
