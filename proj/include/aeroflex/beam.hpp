#pragma once

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "aeroflex/rotation.hpp"
#include "aeroflex/types.hpp"

namespace aeroflex::beam {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector12 = Eigen::Matrix<double, 12, 1>;
using Matrix12 = Eigen::Matrix<double, 12, 12>;

/// Sectional stiffness and inertia. Axis 1 is the beam axis, axis 2 the
/// chordwise axis (EI2 is out-of-plane bending) and axis 3 the section normal.
struct CrossSection {
  double EA = 1e8;
  double GA2 = 1e8;
  double GA3 = 1e8;
  double GJ = 1e4;
  double EI2 = 2e4;
  double EI3 = 4e6;
  double mu = 0.75;
  double j_t = 0.1;
  Mat3 J_rho = Eigen::Vector3d(0.1, 0.001, 0.001).asDiagonal();
  Mat3 S12 = Mat3::Zero();

  /// Baseline HALE wing section; unlisted shear/extensional stiffnesses are
  /// effectively rigid and bending rotary inertia is j_t / 100.
  static CrossSection baseline();

  Mat3 S11() const;
  Mat3 S22() const;
  Matrix6 stiffness_matrix() const;
};

/// Divides every stiffness entry by sigma; inertia is unchanged.
CrossSection scale_stiffness(const CrossSection& section, double sigma);

/// Sectional force and moment from the force and moment strains.
std::pair<Vec3, Vec3> sectional_loads(const Vec3& gamma, const Vec3& kappa,
                                      const CrossSection& section);

struct BeamMesh {
  std::vector<Vec3> nodes;
  std::vector<std::array<int, 2>> elements;
  // Columns are the material axes (beam axis, chord, normal) in body axes.
  std::vector<Mat3> frames;
  std::vector<Vec3> kappa0;
  std::vector<CrossSection> sections;
  std::vector<int> clamped_nodes;

  /// Straight wing along body +y from the origin, clamped at node 0.
  static BeamMesh cantilever(double length, int n_nodes,
                             const CrossSection& section);

  /// Full-span straight wing from -y to +y, clamped at the mid-span node.
  static BeamMesh full_span(double semi_span, int elements_per_semispan,
                            const CrossSection& section);

  int node_count() const { return static_cast<int>(nodes.size()); }
  int element_count() const { return static_cast<int>(elements.size()); }
  double element_length(int e) const;
  Vec3 element_midpoint(int e) const;
  bool is_clamped(int node) const;

  void validate() const;
};

struct NodalState {
  Vec3 u = Vec3::Zero();
  Vec3 psi = Vec3::Zero();
  Vec3 u_dot = Vec3::Zero();
  Vec3 psi_dot = Vec3::Zero();
  Vec3 u_ddot = Vec3::Zero();
  Vec3 psi_ddot = Vec3::Zero();
};

struct TangentSystem {
  MatX M_s;
  MatX C_s;
  MatX K_e;
  MatX K_g;
  VecX f_int;

  MatX K_tan() const { return K_e + K_g; }
};

/// Mapping between nodes and the reduced (unconstrained) DOF vector: six
/// DOFs per free node, translations first, then the rotation vector.
class DofMap {
 public:
  explicit DofMap(const BeamMesh& mesh);

  int size() const { return n_dofs_; }
  int free_node_count() const { return n_dofs_ / 6; }
  /// First reduced DOF of a node, or -1 for a clamped node.
  int offset(int node) const { return offsets_[node]; }

  std::vector<NodalState> expand(const VecX& eta) const;
  VecX reduce(const std::vector<NodalState>& states) const;
  Vector12 element_dofs(const std::array<int, 2>& element,
                        const VecX& eta) const;

 private:
  std::vector<int> offsets_;
  int n_dofs_ = 0;
};

/// Force and moment strains of element e at its single integration point
/// (the midpoint) for nodal displacements and rotation vectors q.
template <typename Scalar>
std::pair<Vector3<Scalar>, Vector3<Scalar>> element_strains(
    const BeamMesh& mesh, int e, const Eigen::Matrix<Scalar, 12, 1>& q) {
  const auto [a, b] = mesh.elements[e];
  const double length = mesh.element_length(e);
  const Vec3 dx0 = (mesh.nodes[b] - mesh.nodes[a]) / length;
  const Vector3<Scalar> u1 = q.template segment<3>(0);
  const Vector3<Scalar> psi1 = q.template segment<3>(3);
  const Vector3<Scalar> u2 = q.template segment<3>(6);
  const Vector3<Scalar> psi2 = q.template segment<3>(9);

  const Scalar inv_length(1.0 / length);
  Vector3<Scalar> dx = (u2 - u1) * inv_length;
  for (int i = 0; i < 3; ++i) dx(i) += dx0(i);
  const Vector3<Scalar> psi_mid = (psi1 + psi2) * Scalar(0.5);
  const Vector3<Scalar> dpsi = (psi2 - psi1) * inv_length;

  const Matrix3<Scalar> rot = rodrigues<Scalar>(psi_mid);
  const Matrix3<Scalar> frame0 = mesh.frames[e].cast<Scalar>();
  const Matrix3<Scalar> frame = rot * frame0;

  Vector3<Scalar> gamma = frame.transpose() * dx;
  gamma(0) -= Scalar(1.0);
  // Material curvature: frame0^T T(psi)^T psi'.
  Vector3<Scalar> kappa =
      frame0.transpose() * (tangent_operator<Scalar>(psi_mid).transpose() * dpsi);
  for (int i = 0; i < 3; ++i) kappa(i) -= mesh.kappa0[e](i);
  return {gamma, kappa};
}

/// One-point strain energy of element e, with section stiffnesses scaled
/// by 1/sigma.
template <typename Scalar>
Scalar element_energy(const BeamMesh& mesh, int e, double sigma,
                      const Eigen::Matrix<Scalar, 12, 1>& q) {
  const auto [gamma, kappa] = element_strains<Scalar>(mesh, e, q);
  const CrossSection& s = mesh.sections[e];
  const Mat3 s11 = s.S11() / sigma;
  const Mat3 s22 = s.S22() / sigma;
  const Mat3 s12 = s.S12 / sigma;
  const Vector3<Scalar> f = s11.cast<Scalar>() * gamma + s12.cast<Scalar>() * kappa;
  const Vector3<Scalar> m =
      s12.transpose().cast<Scalar>() * gamma + s22.cast<Scalar>() * kappa;
  return (gamma.dot(f) + kappa.dot(m)) * Scalar(0.5 * mesh.element_length(e));
}

/// Strain measures between two nodal states of element e.
std::pair<Vec3, Vec3> strain_measures(const BeamMesh& mesh, int e,
                                      const NodalState& a,
                                      const NodalState& b);

/// Element internal force (gradient of the strain energy).
Vector12 element_internal_force(const BeamMesh& mesh, int e, double sigma,
                                const Vector12& q);

/// Element internal force and tangent stiffness (Hessian of the energy).
void element_tangent(const BeamMesh& mesh, int e, double sigma,
                     const Vector12& q, Vector12& force, Matrix12& stiffness);

/// Structural operators of a mesh at a fixed stiffness scale. Immutable
/// after construction.
class BeamModel {
 public:
  BeamModel(BeamMesh mesh, double sigma);

  const BeamMesh& mesh() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  double sigma() const { return sigma_; }
  int size() const { return dofs_.size(); }

  const MatX& mass_matrix() const { return mass_; }
  const MatX& elastic_stiffness() const { return k_elastic_; }

  double strain_energy(const VecX& eta) const;
  VecX internal_force(const VecX& eta) const;
  /// Internal force and full tangent stiffness K_e + K_g(eta).
  void tangent(const VecX& eta, VecX& force, MatX& stiffness) const;

  /// Consistent nodal loads of a dead distributed force/moment per unit
  /// length evaluated at element midpoints.
  VecX consistent_loads(const std::function<Vec3(const Vec3&)>& force,
                        const std::function<Vec3(const Vec3&)>& moment) const;

  /// Sectional force and moment (material axes) of element e.
  std::pair<Vec3, Vec3> element_loads(int e, const VecX& eta) const;

 private:
  BeamMesh mesh_;
  DofMap dofs_;
  double sigma_;
  MatX mass_;
  MatX k_elastic_;
};

/// Assembles the tangent system at the given nodal states.
TangentSystem assemble(const BeamMesh& mesh,
                       const std::vector<NodalState>& states, double sigma);

struct DistributedLoad {
  std::function<Vec3(const Vec3&)> force;
  std::function<Vec3(const Vec3&)> moment;
};

struct StaticOptions {
  bool linear = false;
  double rel_tol = 1e-8;
  int max_iterations = 50;
  int min_load_fraction_inverse = 64;
};

struct StaticSolution {
  VecX eta;
  std::vector<NodalState> states;
  int iterations = 0;
  std::vector<double> residual_history;
};

/// Newton solution of f_int(eta) = f_ext for dead distributed loads, with
/// recursive load-step halving on divergence. options.linear selects the
/// single K_e solve instead.
StaticSolution static_solve(const BeamMesh& mesh, const DistributedLoad& loads,
                            double sigma, const StaticOptions& options = {});

struct Mode {
  double omega = 0.0;  // rad/s
  VecX shape;
  std::string label;
};

/// Vacuum natural frequencies of the constrained mesh, ascending.
std::vector<Mode> modal_frequencies(const BeamMesh& mesh, double sigma,
                                    int n_modes);

/// Tip node displacement (last node of the mesh).
Vec3 tip_displacement(const BeamMesh& mesh, const VecX& eta);

}  // namespace aeroflex::beam
