#include "aeroflex/beam.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aeroflex::beam {

namespace {

using Inner = Eigen::AutoDiffScalar<Vector12>;
using Outer = Eigen::AutoDiffScalar<Eigen::Matrix<Inner, 12, 1>>;

Mat3 wing_frame() {
  Mat3 frame;
  frame.col(0) = Vec3::UnitY();   // beam axis, spanwise
  frame.col(1) = Vec3::UnitX();   // chordwise, towards the leading edge
  frame.col(2) = -Vec3::UnitZ();  // section normal, up (body z is down)
  return frame;
}

void scatter(const DofMap& dofs, const std::array<int, 2>& element,
             const Vector12& fe, VecX& f) {
  for (int k = 0; k < 2; ++k) {
    const int off = dofs.offset(element[k]);
    if (off < 0) continue;
    f.segment<6>(off) += fe.segment<6>(6 * k);
  }
}

void scatter(const DofMap& dofs, const std::array<int, 2>& element,
             const Matrix12& ke, MatX& k) {
  for (int r = 0; r < 2; ++r) {
    const int ro = dofs.offset(element[r]);
    if (ro < 0) continue;
    for (int c = 0; c < 2; ++c) {
      const int co = dofs.offset(element[c]);
      if (co < 0) continue;
      k.block<6, 6>(ro, co) += ke.block<6, 6>(6 * r, 6 * c);
    }
  }
}

}  // namespace

CrossSection CrossSection::baseline() { return CrossSection{}; }

Mat3 CrossSection::S11() const { return Vec3(EA, GA2, GA3).asDiagonal(); }

Mat3 CrossSection::S22() const { return Vec3(GJ, EI2, EI3).asDiagonal(); }

Matrix6 CrossSection::stiffness_matrix() const {
  Matrix6 s;
  s << S11(), S12, S12.transpose(), S22();
  return s;
}

CrossSection scale_stiffness(const CrossSection& section, double sigma) {
  if (!(sigma > 0.0)) {
    throw RangeError("stiffness parameter sigma must be positive, got " +
                     std::to_string(sigma));
  }
  CrossSection out = section;
  out.EA /= sigma;
  out.GA2 /= sigma;
  out.GA3 /= sigma;
  out.GJ /= sigma;
  out.EI2 /= sigma;
  out.EI3 /= sigma;
  out.S12 /= sigma;
  return out;
}

std::pair<Vec3, Vec3> sectional_loads(const Vec3& gamma, const Vec3& kappa,
                                      const CrossSection& section) {
  return {section.S11() * gamma + section.S12 * kappa,
          section.S12.transpose() * gamma + section.S22() * kappa};
}

BeamMesh BeamMesh::cantilever(double length, int n_nodes,
                              const CrossSection& section) {
  if (n_nodes < 2) throw RangeError("a beam mesh needs at least two nodes");
  BeamMesh mesh;
  const int n_el = n_nodes - 1;
  for (int i = 0; i < n_nodes; ++i) {
    mesh.nodes.push_back(Vec3(0.0, length * i / n_el, 0.0));
  }
  for (int e = 0; e < n_el; ++e) {
    mesh.elements.push_back({e, e + 1});
    mesh.frames.push_back(wing_frame());
    mesh.kappa0.push_back(Vec3::Zero());
    mesh.sections.push_back(section);
  }
  mesh.clamped_nodes = {0};
  return mesh;
}

BeamMesh BeamMesh::full_span(double semi_span, int elements_per_semispan,
                             const CrossSection& section) {
  if (elements_per_semispan < 1) {
    throw RangeError("at least one element per semi-span is required");
  }
  BeamMesh mesh;
  const int n_el = 2 * elements_per_semispan;
  for (int i = 0; i <= n_el; ++i) {
    const double y = semi_span * (static_cast<double>(i) / elements_per_semispan - 1.0);
    mesh.nodes.push_back(Vec3(0.0, y, 0.0));
  }
  for (int e = 0; e < n_el; ++e) {
    mesh.elements.push_back({e, e + 1});
    mesh.frames.push_back(wing_frame());
    mesh.kappa0.push_back(Vec3::Zero());
    mesh.sections.push_back(section);
  }
  mesh.clamped_nodes = {elements_per_semispan};
  return mesh;
}

double BeamMesh::element_length(int e) const {
  return (nodes[elements[e][1]] - nodes[elements[e][0]]).norm();
}

Vec3 BeamMesh::element_midpoint(int e) const {
  return 0.5 * (nodes[elements[e][0]] + nodes[elements[e][1]]);
}

bool BeamMesh::is_clamped(int node) const {
  return std::find(clamped_nodes.begin(), clamped_nodes.end(), node) !=
         clamped_nodes.end();
}

void BeamMesh::validate() const {
  const std::size_t n_el = elements.size();
  if (frames.size() != n_el || kappa0.size() != n_el || sections.size() != n_el) {
    throw DimensionError("per-element mesh arrays differ in length");
  }
  for (std::size_t e = 0; e < n_el; ++e) {
    for (int k : elements[e]) {
      if (k < 0 || k >= node_count()) throw DimensionError("element node out of range");
    }
    if (!(element_length(static_cast<int>(e)) > 0.0)) {
      throw RangeError("element " + std::to_string(e) + " has zero length");
    }
  }
}

DofMap::DofMap(const BeamMesh& mesh) : offsets_(mesh.node_count(), -1) {
  for (int i = 0; i < mesh.node_count(); ++i) {
    if (mesh.is_clamped(i)) continue;
    offsets_[i] = n_dofs_;
    n_dofs_ += 6;
  }
}

std::vector<NodalState> DofMap::expand(const VecX& eta) const {
  if (eta.size() != n_dofs_) throw DimensionError("structural vector size mismatch");
  std::vector<NodalState> states(offsets_.size());
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    if (offsets_[i] < 0) continue;
    states[i].u = eta.segment<3>(offsets_[i]);
    states[i].psi = eta.segment<3>(offsets_[i] + 3);
  }
  return states;
}

VecX DofMap::reduce(const std::vector<NodalState>& states) const {
  if (states.size() != offsets_.size()) {
    throw DimensionError("nodal state list does not match the mesh");
  }
  VecX eta = VecX::Zero(n_dofs_);
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    if (offsets_[i] < 0) continue;
    eta.segment<3>(offsets_[i]) = states[i].u;
    eta.segment<3>(offsets_[i] + 3) = states[i].psi;
  }
  return eta;
}

Vector12 DofMap::element_dofs(const std::array<int, 2>& element,
                              const VecX& eta) const {
  Vector12 q = Vector12::Zero();
  for (int k = 0; k < 2; ++k) {
    const int off = offsets_[element[k]];
    if (off >= 0) q.segment<6>(6 * k) = eta.segment<6>(off);
  }
  return q;
}

std::pair<Vec3, Vec3> strain_measures(const BeamMesh& mesh, int e,
                                      const NodalState& a,
                                      const NodalState& b) {
  Vector12 q;
  q << a.u, a.psi, b.u, b.psi;
  for (const Vec3* psi : {&a.psi, &b.psi}) {
    if (psi->norm() >= 2.0 * kPi) {
      throw ParameterizationError("nodal rotation vector outside [0, 2*pi)");
    }
  }
  return element_strains<double>(mesh, e, q);
}

Vector12 element_internal_force(const BeamMesh& mesh, int e, double sigma,
                                const Vector12& q) {
  Eigen::Matrix<Inner, 12, 1> x;
  for (int i = 0; i < 12; ++i) x(i) = Inner(q(i), 12, i);
  const Inner energy = element_energy<Inner>(mesh, e, sigma, x);
  return energy.derivatives();
}

void element_tangent(const BeamMesh& mesh, int e, double sigma,
                     const Vector12& q, Vector12& force, Matrix12& stiffness) {
  Eigen::Matrix<Outer, 12, 1> x;
  for (int i = 0; i < 12; ++i) {
    x(i).value() = Inner(q(i), 12, i);
    x(i).derivatives().setZero();
    x(i).derivatives()(i) = Inner(1.0);
  }
  const Outer energy = element_energy<Outer>(mesh, e, sigma, x);
  force = energy.value().derivatives();
  for (int i = 0; i < 12; ++i) {
    stiffness.row(i) = energy.derivatives()(i).derivatives().transpose();
  }
  stiffness = 0.5 * (stiffness + stiffness.transpose()).eval();
}

BeamModel::BeamModel(BeamMesh mesh, double sigma)
    : mesh_(std::move(mesh)), dofs_(mesh_), sigma_(sigma) {
  if (!(sigma > 0.0)) {
    throw RangeError("stiffness parameter sigma must be positive, got " +
                     std::to_string(sigma));
  }
  mesh_.validate();
  const int n = dofs_.size();
  mass_ = MatX::Zero(n, n);
  for (int e = 0; e < mesh_.element_count(); ++e) {
    const double l = mesh_.element_length(e);
    const CrossSection& s = mesh_.sections[e];
    const Mat3 j_body = mesh_.frames[e] * s.J_rho * mesh_.frames[e].transpose();
    Matrix12 me = Matrix12::Zero();
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        const double w = (r == c ? 2.0 : 1.0) * l / 6.0;
        me.block<3, 3>(6 * r, 6 * c) = w * s.mu * Mat3::Identity();
        me.block<3, 3>(6 * r + 3, 6 * c + 3) = w * j_body;
      }
    }
    scatter(dofs_, mesh_.elements[e], me, mass_);
  }
  VecX f;
  tangent(VecX::Zero(n), f, k_elastic_);
  if (n > 0) {
    Eigen::LDLT<MatX> ldlt(k_elastic_);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-12 * ldlt.vectorD().cwiseAbs().maxCoeff()) {
      throw ConstraintError(
          "reduced stiffness matrix is singular; the mesh is insufficiently "
          "constrained");
    }
  }
}

double BeamModel::strain_energy(const VecX& eta) const {
  double u = 0.0;
  for (int e = 0; e < mesh_.element_count(); ++e) {
    const Vector12 q = dofs_.element_dofs(mesh_.elements[e], eta);
    u += element_energy<double>(mesh_, e, sigma_, q);
  }
  return u;
}

VecX BeamModel::internal_force(const VecX& eta) const {
  VecX f = VecX::Zero(size());
  for (int e = 0; e < mesh_.element_count(); ++e) {
    const Vector12 q = dofs_.element_dofs(mesh_.elements[e], eta);
    scatter(dofs_, mesh_.elements[e], element_internal_force(mesh_, e, sigma_, q), f);
  }
  return f;
}

void BeamModel::tangent(const VecX& eta, VecX& force, MatX& stiffness) const {
  force = VecX::Zero(size());
  stiffness = MatX::Zero(size(), size());
  Vector12 fe;
  Matrix12 ke;
  for (int e = 0; e < mesh_.element_count(); ++e) {
    const Vector12 q = dofs_.element_dofs(mesh_.elements[e], eta);
    element_tangent(mesh_, e, sigma_, q, fe, ke);
    scatter(dofs_, mesh_.elements[e], fe, force);
    scatter(dofs_, mesh_.elements[e], ke, stiffness);
  }
}

VecX BeamModel::consistent_loads(
    const std::function<Vec3(const Vec3&)>& force,
    const std::function<Vec3(const Vec3&)>& moment) const {
  VecX f = VecX::Zero(size());
  for (int e = 0; e < mesh_.element_count(); ++e) {
    const Vec3 mid = mesh_.element_midpoint(e);
    const double half = 0.5 * mesh_.element_length(e);
    Vector12 fe = Vector12::Zero();
    const Vec3 fm = force ? force(mid) : Vec3::Zero();
    const Vec3 mm = moment ? moment(mid) : Vec3::Zero();
    fe << half * fm, half * mm, half * fm, half * mm;
    scatter(dofs_, mesh_.elements[e], fe, f);
  }
  return f;
}

std::pair<Vec3, Vec3> BeamModel::element_loads(int e, const VecX& eta) const {
  const Vector12 q = dofs_.element_dofs(mesh_.elements[e], eta);
  const auto [gamma, kappa] = element_strains<double>(mesh_, e, q);
  return sectional_loads(gamma, kappa, scale_stiffness(mesh_.sections[e], sigma_));
}

TangentSystem assemble(const BeamMesh& mesh,
                       const std::vector<NodalState>& states, double sigma) {
  const BeamModel model(mesh, sigma);
  const VecX eta = model.dofs().reduce(states);
  TangentSystem sys;
  sys.M_s = model.mass_matrix();
  sys.C_s = MatX::Zero(model.size(), model.size());
  sys.K_e = model.elastic_stiffness();
  MatX k_tan;
  model.tangent(eta, sys.f_int, k_tan);
  sys.K_g = k_tan - sys.K_e;
  return sys;
}

namespace {

// Newton iteration at a fixed load level; returns false on divergence or
// exhaustion of the iteration budget.
bool newton_at_load(const BeamModel& model, const VecX& f_ext, VecX& eta,
                    const StaticOptions& options, StaticSolution& sol) {
  const double f_norm = std::max(f_ext.norm(), 1e-300);
  int growth = 0;
  double previous = 0.0;
  VecX f_int;
  MatX k_tan;
  for (int it = 0; it < options.max_iterations; ++it) {
    model.tangent(eta, f_int, k_tan);
    const VecX r = f_ext - f_int;
    const double rn = r.norm();
    sol.residual_history.push_back(rn);
    ++sol.iterations;
    if (rn / f_norm < options.rel_tol || rn < 1e-12) return true;
    if (it > 0 && rn > previous) {
      if (++growth >= 5) return false;
    } else {
      growth = 0;
    }
    previous = rn;
    if (!std::isfinite(rn)) return false;
    eta += k_tan.ldlt().solve(r);
  }
  return false;
}

}  // namespace

StaticSolution static_solve(const BeamMesh& mesh, const DistributedLoad& loads,
                            double sigma, const StaticOptions& options) {
  const BeamModel model(mesh, sigma);
  const VecX f_full = model.consistent_loads(loads.force, loads.moment);
  StaticSolution sol;
  if (options.linear) {
    sol.eta = model.elastic_stiffness().ldlt().solve(f_full);
    sol.states = model.dofs().expand(sol.eta);
    sol.iterations = 1;
    return sol;
  }

  VecX eta = VecX::Zero(model.size());
  double reached = 0.0;
  double step = 1.0;
  const double min_step = 1.0 / options.min_load_fraction_inverse;
  while (reached < 1.0) {
    const double target = std::min(1.0, reached + step);
    VecX trial = eta;
    if (newton_at_load(model, target * f_full, trial, options, sol)) {
      eta = trial;
      reached = target;
    } else {
      step *= 0.5;
      if (step < min_step) {
        std::ostringstream msg;
        msg << "static solve failed to converge at load fraction " << target
            << "; last residuals:";
        const auto& h = sol.residual_history;
        for (std::size_t i = h.size() > 5 ? h.size() - 5 : 0; i < h.size(); ++i) {
          msg << ' ' << h[i];
        }
        throw ConvergenceError(msg.str());
      }
    }
  }
  sol.eta = eta;
  sol.states = model.dofs().expand(eta);
  return sol;
}

std::vector<Mode> modal_frequencies(const BeamMesh& mesh, double sigma,
                                    int n_modes) {
  const BeamModel model(mesh, sigma);
  const int n = model.size();
  if (n_modes < 1 || n_modes > n) {
    throw RangeError("requested " + std::to_string(n_modes) +
                     " modes but the reduced system has " + std::to_string(n) +
                     " DOFs");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<MatX> solver(
      model.elastic_stiffness(), model.mass_matrix());
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("generalized eigenvalue solver failed");
  }
  std::vector<Mode> modes;
  int counts[3] = {0, 0, 0};
  const char* families[3] = {"torsion", "out-of-plane bending", "in-plane bending"};
  for (int k = 0; k < n_modes; ++k) {
    Mode mode;
    mode.omega = std::sqrt(std::max(0.0, solver.eigenvalues()(k)));
    mode.shape = solver.eigenvectors().col(k);
    // Dominant family by strain-energy content of a small-amplitude shape.
    const VecX probe = mode.shape * (1e-6 / mode.shape.cwiseAbs().maxCoeff());
    Vec3 energy = Vec3::Zero();
    for (int e = 0; e < mesh.element_count(); ++e) {
      const Vector12 q = model.dofs().element_dofs(mesh.elements[e], probe);
      const auto kappa = element_strains<double>(mesh, e, q).second;
      const Mat3 s22 = mesh.sections[e].S22();
      for (int i = 0; i < 3; ++i) energy(i) += s22(i, i) * kappa(i) * kappa(i);
    }
    Eigen::Index fam = 0;
    energy.maxCoeff(&fam);
    ++counts[fam];
    mode.label = std::string(families[fam]) + " " + std::to_string(counts[fam]);
    modes.push_back(std::move(mode));
  }
  return modes;
}

Vec3 tip_displacement(const BeamMesh& mesh, const VecX& eta) {
  const DofMap dofs(mesh);
  const int off = dofs.offset(mesh.node_count() - 1);
  return off < 0 ? Vec3::Zero() : Vec3(eta.segment<3>(off));
}

}  // namespace aeroflex::beam
