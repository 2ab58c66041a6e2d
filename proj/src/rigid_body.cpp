#include "aeroflex/rigid_body.hpp"

#include <cmath>

namespace aeroflex::rigid {

Vec4 quat_rates(const Vec4& q, const Vec3& omega) {
  const double p = omega(0), qr = omega(1), r = omega(2);
  Eigen::Matrix4d big;
  big << 0, -p, -qr, -r,
         p, 0, r, -qr,
         qr, -r, 0, p,
         r, qr, -p, 0;
  return 0.5 * big * q;
}

Mat3 quat_to_matrix(const Vec4& q) {
  if (q.norm() < 1e-12) throw RangeError("zero quaternion has no attitude");
  const double q0 = q(0), q1 = q(1), q2 = q(2), q3 = q(3);
  Mat3 r;
  r << 1 - 2 * (q2 * q2 + q3 * q3), 2 * (q1 * q2 - q0 * q3), 2 * (q1 * q3 + q0 * q2),
       2 * (q1 * q2 + q0 * q3), 1 - 2 * (q1 * q1 + q3 * q3), 2 * (q2 * q3 - q0 * q1),
       2 * (q1 * q3 - q0 * q2), 2 * (q2 * q3 + q0 * q1), 1 - 2 * (q1 * q1 + q2 * q2);
  return r;
}

Vec4 normalize_quat(const Vec4& q) {
  const double n = q.norm();
  if (n < 1e-12) throw RangeError("cannot normalize a zero quaternion");
  return q / n;
}

Vec3 gravity_body(const Vec4& q, double m, double g) {
  return quat_to_matrix(q).transpose() * Vec3(0, 0, m * g);
}

Vec3 translational_rates(const RigidState& state, const MassProperties& mass,
                         const Vec3& F_aero, const Vec3& F_grav,
                         const Vec3& F_thrust) {
  if (!(mass.m > 0.0)) throw RangeError("aircraft mass must be > 0");
  return (F_aero + F_grav + F_thrust) / mass.m - state.omega.cross(state.V_B);
}

Vec3 rotational_rates(const RigidState& state, const MassProperties& mass,
                      const Vec3& M_aero, const Vec3& M_thrust) {
  const Mat3 j = mass.J();
  const Eigen::FullPivLU<Mat3> lu(j);
  if (lu.rank() < 3 || std::abs(j.determinant()) < 1e-12 * std::pow(j.norm(), 3)) {
    throw ConstraintError("aircraft inertia tensor is singular");
  }
  return lu.solve(M_aero + M_thrust - state.omega.cross(j * state.omega));
}

Mat3 inertia_correction(const std::vector<double>& masses,
                        const std::vector<Vec3>& r0,
                        const std::vector<Vec3>& u) {
  if (masses.size() != r0.size() || masses.size() != u.size()) {
    throw DimensionError("inertia_correction: mismatched point lists");
  }
  Mat3 dj = Mat3::Zero();
  for (std::size_t i = 0; i < masses.size(); ++i) {
    const Vec3& x = r0[i];
    const Vec3& d = u[i];
    const Mat3 sym = 0.5 * (x * d.transpose() + d * x.transpose());
    dj += masses[i] * ((d.squaredNorm() * Mat3::Identity() - d * d.transpose()) +
                       2.0 * (x.dot(d) * Mat3::Identity() - sym));
  }
  return dj;
}

Mat3 inertia_correction(const beam::BeamMesh& mesh,
                        const std::vector<beam::NodalState>& states) {
  if (static_cast<int>(states.size()) != mesh.node_count()) {
    throw DimensionError("inertia_correction: one state per node expected");
  }
  std::vector<double> masses;
  std::vector<Vec3> r0, u;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto [a, b] = mesh.elements[e];
    masses.push_back(mesh.sections[e].mu * mesh.element_length(e));
    r0.push_back(mesh.element_midpoint(e));
    u.push_back(0.5 * (states[a].u + states[b].u));
  }
  return inertia_correction(masses, r0, u);
}

Mat3 wing_inertia(const beam::BeamMesh& mesh) {
  Mat3 j = Mat3::Zero();
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double l = mesh.element_length(e);
    const Vec3 r = mesh.element_midpoint(e);
    const auto& s = mesh.sections[e];
    j += s.mu * l * (r.squaredNorm() * Mat3::Identity() - r * r.transpose());
    j += l * mesh.frames[e] * s.J_rho * mesh.frames[e].transpose();
  }
  return j;
}

double wing_mass(const beam::BeamMesh& mesh) {
  double m = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    m += mesh.sections[e].mu * mesh.element_length(e);
  }
  return m;
}

Vec3 cg_rates(const RigidState& state) { return quat_to_matrix(state.q) * state.V_B; }

}  // namespace aeroflex::rigid
