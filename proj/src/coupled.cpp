#include "aeroflex/coupled.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "aeroflex/rotation.hpp"

namespace aeroflex::coupled {

using beam::NodalState;

void ModelOptions::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw RangeError(std::string(name) + " must be > 0");
  };
  positive(sigma, "sigma");
  positive(semi_span, "semi_span");
  positive(chord, "chord");
  positive(rho, "rho");
  positive(U, "U");
  positive(tail_arm, "tail_arm");
  if (tail_area < 0.0) throw RangeError("tail_area must be >= 0");
  if (fuselage_mass < 0.0) throw RangeError("fuselage_mass must be >= 0");
  if (elements_per_semispan < 1) throw RangeError("elements_per_semispan must be >= 1");
}

void SolverSettings::validate() const {
  if (!(gamma >= 0.5 && 2.0 * beta >= gamma)) {
    throw RangeError("Newmark parameters must satisfy 2 beta >= gamma >= 1/2");
  }
  if (!(dt > 0.0)) throw RangeError("dt must be > 0");
  if (max_newton_iter < 1) throw RangeError("max_newton_iter must be >= 1");
  if (jacobian_refresh < 1) throw RangeError("jacobian_refresh must be >= 1");
}

VecX pack_state(const CoupledState& p) {
  const int n = static_cast<int>(p.eta.size());
  if (p.eta_dot.size() != n || p.x_a.size() % 4 != 0) {
    throw DimensionError("pack_state: inconsistent partition sizes");
  }
  Layout l{n, static_cast<int>(p.x_a.size() / 4)};
  VecX x(l.size());
  x.segment(l.eta(), n) = p.eta;
  x.segment(l.vel(), n) = p.eta_dot;
  x.segment(l.aero(), 4 * l.strips) = p.x_a;
  x.segment<3>(l.V()) = p.V_B;
  x.segment<3>(l.omega()) = p.omega;
  x.segment<4>(l.quat()) = p.q;
  x.segment<3>(l.pos()) = p.p_cg;
  return x;
}

CoupledState unpack_state(const VecX& x, int n, int strips) {
  const Layout l{n, strips};
  if (x.size() != l.size()) {
    throw DimensionError("unpack_state: expected length " + std::to_string(l.size()) +
                         ", got " + std::to_string(x.size()));
  }
  CoupledState p;
  p.eta = x.segment(l.eta(), n);
  p.eta_dot = x.segment(l.vel(), n);
  p.x_a = x.segment(l.aero(), 4 * strips);
  p.V_B = x.segment<3>(l.V());
  p.omega = x.segment<3>(l.omega());
  p.q = x.segment<4>(l.quat());
  p.p_cg = x.segment<3>(l.pos());
  return p;
}

Mat3 strip_frame(const beam::BeamMesh& mesh, int e, const std::vector<NodalState>& states) {
  const auto [a, b] = mesh.elements[e];
  const Vec3 psi = 0.5 * (states[a].psi + states[b].psi);
  const Mat3 lambda = rodrigues<double>(psi) * mesh.frames[e];
  Mat3 rc;
  rc.col(0) = -lambda.col(1);
  rc.col(1) = lambda.col(0);
  rc.col(2) = lambda.col(2);
  return rc;
}

Resultant integrated_aero_loads(const beam::BeamMesh& mesh,
                                const std::vector<NodalState>& states,
                                const std::vector<StripLoadVector>& loads) {
  if (static_cast<int>(loads.size()) != mesh.element_count()) {
    throw DimensionError("integrated_aero_loads: one load per strip expected");
  }
  Resultant out;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto [a, b] = mesh.elements[e];
    const Mat3 rc = strip_frame(mesh, e, states);
    const double l = mesh.element_length(e);
    const Vec3 f = rc * loads[e].force;
    const Vec3 r = mesh.element_midpoint(e) + 0.5 * (states[a].u + states[b].u);
    out.force += l * f;
    out.moment += l * (r.cross(f) + loads[e].moment * rc.col(1));
  }
  return out;
}

double pitch_angle(const Vec4& q) {
  const Mat3 r = rigid::quat_to_matrix(q);
  return std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
}

namespace {

beam::BeamMesh build_mesh(const ModelOptions& o) {
  if (o.full_aircraft) return beam::BeamMesh::full_span(o.semi_span, o.elements_per_semispan, o.section);
  return beam::BeamMesh::cantilever(o.semi_span, o.elements_per_semispan + 1, o.section);
}

}  // namespace

CoupledModel::CoupledModel(ModelOptions options)
    : options_((options.validate(), options)),
      beam_(build_mesh(options_), options_.sigma) {
  layout_ = Layout{beam_.size(), beam_.mesh().element_count()};
  const auto& mesh = beam_.mesh();
  mass_ = rigid::wing_mass(mesh) + (options_.full_aircraft ? options_.fuselage_mass : 0.0);
  J0_ = rigid::wing_inertia(mesh);
  node_mass_.assign(mesh.node_count(), 0.0);
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double m = mesh.sections[e].mu * mesh.element_length(e);
    node_mass_[mesh.elements[e][0]] += 0.5 * m;
    node_mass_[mesh.elements[e][1]] += 0.5 * m;
  }
}

aero::StripGeometry CoupledModel::strip_geometry(int e) const {
  aero::StripGeometry g;
  g.b = 0.5 * options_.chord;
  g.c = options_.chord;
  g.a = options_.elastic_axis;
  g.ds = mesh().element_length(e);
  g.s = mesh().element_midpoint(e)(1);
  return g;
}

double CoupledModel::force_roundoff() const {
  double stiff = 0.0;
  for (const auto& s : mesh().sections) {
    stiff = std::max(stiff, s.stiffness_matrix().cwiseAbs().maxCoeff());
  }
  return 16.0 * std::numeric_limits<double>::epsilon() * stiff / beam_.sigma() *
         std::sqrt(static_cast<double>(mesh().element_count()));
}

int CoupledModel::tip_node() const { return mesh().node_count() - 1; }

int CoupledModel::root_strip() const {
  return options_.full_aircraft ? options_.elements_per_semispan : 0;
}

std::vector<NodalState> CoupledModel::nodal_states(const VecX& z, const VecX& z_dot) const {
  const auto& dofs = beam_.dofs();
  std::vector<NodalState> states(mesh().node_count());
  for (int i = 0; i < mesh().node_count(); ++i) {
    const int o = dofs.offset(i);
    if (o < 0) continue;
    NodalState& s = states[i];
    s.u = z.segment<3>(layout_.eta() + o);
    s.psi = z.segment<3>(layout_.eta() + o + 3);
    s.u_dot = z.segment<3>(layout_.vel() + o);
    s.psi_dot = z.segment<3>(layout_.vel() + o + 3);
    s.u_ddot = z_dot.segment<3>(layout_.vel() + o);
    s.psi_ddot = z_dot.segment<3>(layout_.vel() + o + 3);
  }
  return states;
}

namespace {

StripResult strip_at(const CoupledModel& model, int e, const std::vector<NodalState>& states,
                     const VecX& z, const VecX& z_dot, double t,
                     const std::optional<aero::GustSpec>& gust) {
  const auto& o = model.options();
  const auto& mesh = model.mesh();
  const Layout& l = model.layout();
  const auto [a, b] = mesh.elements[e];
  const NodalState& na = states[a];
  const NodalState& nb = states[b];

  const Vec3 psi = 0.5 * (na.psi + nb.psi);
  const Vec3 u = 0.5 * (na.u + nb.u);
  const Vec3 u_dot = 0.5 * (na.u_dot + nb.u_dot);
  const Vec3 u_ddot = 0.5 * (na.u_ddot + nb.u_ddot);
  const Vec3 psi_dot = 0.5 * (na.psi_dot + nb.psi_dot);
  const Vec3 psi_ddot = 0.5 * (na.psi_ddot + nb.psi_ddot);

  const Vec3 V = z.segment<3>(l.V());
  const Vec3 w = z.segment<3>(l.omega());
  const Vec4 q = z.segment<4>(l.quat());
  const Vec3 V_dot = z_dot.segment<3>(l.V());
  const Vec3 w_dot = z_dot.segment<3>(l.omega());

  const Mat3 tangent = tangent_operator<double>(psi);
  const Mat3 rc = strip_frame(mesh, e, states);
  const Vec3 span = rc.col(1);
  const Vec3 up = rc.col(2);
  const Mat3 r_zeta = rigid::quat_to_matrix(q);

  StripResult out;
  out.position = mesh.element_midpoint(e) + u;
  if (!o.aerodynamics) return out;
  aero::StripGeometry geom = model.strip_geometry(e);
  geom.R_c = rc;
  const Vec3 v_eff = aero::effective_velocity(geom, Vec3::Zero(), r_zeta,
                                              V + w.cross(out.position), u_dot);
  out.alpha = aero::effective_aoa(v_eff);
  out.U = std::hypot(v_eff(0), v_eff(2));

  aero::StripKinematics kin;
  kin.U = out.U;
  kin.alpha = out.alpha;
  kin.alpha_dot = span.dot(w + tangent * psi_dot);
  kin.alpha_ddot = span.dot(w_dot + tangent * psi_ddot);
  kin.h_ddot = -up.dot(u_ddot + V_dot + w_dot.cross(out.position));

  if (gust) {
    const double wg = aero::gust_velocity(t, *gust, o.U);
    out.w_gust = up.dot(r_zeta.transpose() * Vec3(0, 0, -wg));
  }
  const int xo = l.aero() + 4 * e;
  const aero::AeroStripState st{z(xo), z(xo + 1), z(xo + 2), z(xo + 3), 0.0};
  out.loads = aero::strip_loads(geom, kin, st, o.aero, o.rho);
  out.w34 = aero::downwash_34(geom, kin);
  out.lag_rates = aero::aero_state_rates(st, out.w34, out.w_gust, out.U, geom.b, o.aero);

  const double sa = std::sin(out.alpha), ca = std::cos(out.alpha);
  const Vec3 f_strip = out.loads.L * Vec3(-sa, 0, ca) + out.loads.D * Vec3(ca, 0, sa);
  out.force_body = rc * f_strip;
  out.moment_body = out.loads.M * span;
  return out;
}

}  // namespace

StripResult CoupledModel::evaluate_strip(int e, const VecX& z, const VecX& z_dot, double t) const {
  return strip_at(*this, e, nodal_states(z, z_dot), z, z_dot, t, gust_);
}

std::vector<StripResult> CoupledModel::strips(const std::vector<NodalState>& states,
                                              const VecX& z, const VecX& z_dot,
                                              double t) const {
  std::vector<StripResult> out;
  if (!options_.aerodynamics) return out;
  out.reserve(layout_.strips);
  for (int e = 0; e < layout_.strips; ++e) {
    out.push_back(strip_at(*this, e, states, z, z_dot, t, gust_));
  }
  return out;
}

VecX CoupledModel::structural_loads(const std::vector<NodalState>& states,
                                    const std::vector<StripResult>& strips, const VecX& z,
                                    const VecX& z_dot) const {
  const auto& dofs = beam_.dofs();
  const auto& m = mesh();
  VecX f_ext = VecX::Zero(layout_.n);
  auto add_force = [&](int node, const Vec3& f) {
    const int o = dofs.offset(node);
    if (o >= 0) f_ext.segment<3>(o) += f;
  };
  auto add_moment = [&](int node, const Vec3& mom) {
    const int o = dofs.offset(node);
    if (o >= 0) {
      f_ext.segment<3>(o + 3) += tangent_operator<double>(states[node].psi).transpose() * mom;
    }
  };
  for (std::size_t e = 0; e < strips.size(); ++e) {
    const double l = m.element_length(static_cast<int>(e));
    for (int node : m.elements[e]) {
      add_force(node, 0.5 * l * strips[e].force_body);
      add_moment(node, 0.5 * l * strips[e].moment_body);
    }
  }
  if (!options_.full_aircraft) return f_ext;
  const Vec3 V = z.segment<3>(layout_.V());
  const Vec3 w = z.segment<3>(layout_.omega());
  const Vec3 V_dot = z_dot.segment<3>(layout_.V());
  const Vec3 w_dot = z_dot.segment<3>(layout_.omega());
  const Vec3 g = options_.gravity ? rigid::gravity_body(z.segment<4>(layout_.quat()), 1.0)
                                  : Vec3::Zero();
  for (int i = 0; i < m.node_count(); ++i) {
    if (dofs.offset(i) < 0) continue;
    const Vec3 r = m.nodes[i] + states[i].u;
    const Vec3 acc = V_dot + w.cross(V) + w_dot.cross(r) + w.cross(w.cross(r)) +
                     2.0 * w.cross(states[i].u_dot);
    add_force(i, node_mass_[i] * (g - acc));
  }
  return f_ext;
}

Resultant CoupledModel::rigid_loads(const std::vector<StripResult>& strips,
                                    const VecX& z) const {
  Resultant r;
  for (std::size_t e = 0; e < strips.size(); ++e) {
    const double l = mesh().element_length(static_cast<int>(e));
    r.force += l * strips[e].force_body;
    r.moment += l * (strips[e].position.cross(strips[e].force_body) + strips[e].moment_body);
  }
  const Vec3 V = z.segment<3>(layout_.V());
  const Vec3 w = z.segment<3>(layout_.omega());
  const Vec4 q = z.segment<4>(layout_.quat());
  if (options_.gravity) r.force += rigid::gravity_body(q, mass_);
  r.force += Vec3(trim_.thrust, 0, 0);
  double tail_lift = 0.0;
  if (options_.aerodynamics && options_.tail_area > 0.0) {
    const double speed = V.norm();
    if (speed > 0.0) {
      const double alpha_t = std::atan2(V(2), V(0)) + w(1) * options_.tail_arm / speed;
      tail_lift = 0.5 * options_.rho * speed * speed * options_.tail_area *
                  options_.aero.cl_alpha * (alpha_t - trim_.tail_alpha_ref);
    }
  }
  r.force += Vec3(0, 0, -tail_lift);
  r.moment += Vec3(0, -options_.tail_arm * tail_lift + trim_.tail_moment, 0);
  return r;
}

Resultant CoupledModel::aero_resultant(const VecX& z, const VecX& z_dot, double t) const {
  const auto states = nodal_states(z, z_dot);
  Resultant r;
  const auto st = strips(states, z, z_dot, t);
  for (std::size_t e = 0; e < st.size(); ++e) {
    const double l = mesh().element_length(static_cast<int>(e));
    r.force += l * st[e].force_body;
    r.moment += l * (st[e].position.cross(st[e].force_body) + st[e].moment_body);
  }
  return r;
}

Resultant CoupledModel::total_external(const VecX& z, const VecX& z_dot, double t) const {
  const auto states = nodal_states(z, z_dot);
  return rigid_loads(strips(states, z, z_dot, t), z);
}

VecX CoupledModel::residual(const VecX& z, const VecX& z_dot, double t,
                            bool include_elastic) const {
  if (z.size() != size() || z_dot.size() != size()) {
    throw DimensionError("residual: state length mismatch");
  }
  const Layout& l = layout_;
  const auto states = nodal_states(z, z_dot);
  VecX res = VecX::Zero(size());
  const auto st = strips(states, z, z_dot, t);
  res.segment(l.vel(), l.n) = -structural_loads(states, st, z, z_dot);
  if (include_elastic) {
    res.segment(l.eta(), l.n) = z_dot.segment(l.eta(), l.n) - z.segment(l.vel(), l.n);
    res.segment(l.vel(), l.n) += beam_.mass_matrix() * z_dot.segment(l.vel(), l.n) +
                                 beam_.internal_force(z.segment(l.eta(), l.n));
  }
  if (options_.aerodynamics) {
    for (int e = 0; e < l.strips; ++e) {
      res.segment<4>(l.aero() + 4 * e) = z_dot.segment<4>(l.aero() + 4 * e) - st[e].lag_rates;
    }
  } else {
    res.segment(l.aero(), 4 * l.strips) = z_dot.segment(l.aero(), 4 * l.strips);
  }

  if (!options_.full_aircraft) {
    res.tail(13) = z_dot.tail(13);
    return res;
  }
  const Vec3 V = z.segment<3>(l.V());
  const Vec3 w = z.segment<3>(l.omega());
  const Vec4 q = z.segment<4>(l.quat());
  const Resultant ext = rigid_loads(st, z);
  rigid::MassProperties mp{mass_, J0_, rigid::inertia_correction(mesh(), states)};
  rigid::RigidState rs{V, w, q, z.segment<3>(l.pos())};
  const Vec3 acc = rigid::translational_rates(rs, mp, ext.force, Vec3::Zero(), Vec3::Zero());
  res.segment<3>(l.V()) = mass_ * (z_dot.segment<3>(l.V()) - acc);
  const Mat3 J = mp.J();
  res.segment<3>(l.omega()) = J * z_dot.segment<3>(l.omega()) + w.cross(J * w) - ext.moment;
  res.segment<4>(l.quat()) = z_dot.segment<4>(l.quat()) - rigid::quat_rates(q, w);
  res.segment<3>(l.pos()) = z_dot.segment<3>(l.pos()) - rigid::cg_rates(rs);
  return res;
}

VecX CoupledModel::steady_lag_states(const VecX& z, double t) const {
  VecX x_a = VecX::Zero(4 * layout_.strips);
  if (!options_.aerodynamics) return x_a;
  VecX zz = z;
  zz.segment(layout_.aero(), 4 * layout_.strips).setZero();
  const VecX zero = VecX::Zero(size());
  const auto states = nodal_states(zz, zero);
  const auto& k = options_.aero;
  for (int e = 0; e < layout_.strips; ++e) {
    const StripResult s = strip_at(*this, e, states, zz, zero, t, gust_);
    const double r = s.U / (0.5 * options_.chord);
    x_a.segment<4>(4 * e) = Vec4(s.w34 / (k.eps1 * r), s.w34 / (k.eps2 * r),
                                 s.w_gust / (k.beta1 * r), s.w_gust / (k.beta2 * r));
  }
  return x_a;
}

VecX CoupledModel::level_state(double alpha, const VecX& eta) const {
  CoupledState p;
  p.eta = eta.size() ? eta : VecX::Zero(layout_.n);
  p.eta_dot = VecX::Zero(layout_.n);
  p.x_a = VecX::Zero(4 * layout_.strips);
  p.V_B = options_.U * Vec3(std::cos(alpha), 0, std::sin(alpha));
  if (options_.full_aircraft) {
    p.q = Vec4(std::cos(alpha / 2), 0, std::sin(alpha / 2), 0);
    p.p_cg = Vec3(0, 0, -options_.altitude);
  }
  VecX z = pack_state(p);
  z.segment(layout_.aero(), 4 * layout_.strips) = steady_lag_states(z);
  return z;
}

double CoupledModel::root_bending_moment(const VecX& z) const {
  return beam_.element_loads(root_strip(), z.segment(layout_.eta(), layout_.n)).second(1);
}

namespace {

double fd_step(double x) { return 1e-7 * std::max(1.0, std::abs(x)); }

}  // namespace

MatX CoupledModel::jacobian(const VecX& z, const VecX& z_dot, double t, double c) const {
  const Layout& l = layout_;
  const int n = size();
  MatX jac(n, n);
  const VecX base = residual(z, z_dot, t, false);
  VecX zp = z, zdp = z_dot;
  for (int j = 0; j < n; ++j) {
    const double h = fd_step(z(j));
    zp(j) = z(j) + h;
    zdp(j) = z_dot(j) + c * h;
    jac.col(j) = (residual(zp, zdp, t, false) - base) / h;
    zp(j) = z(j);
    zdp(j) = z_dot(j);
  }
  VecX f;
  MatX k;
  beam_.tangent(z.segment(l.eta(), l.n), f, k);
  jac.block(l.eta(), l.eta(), l.n, l.n).diagonal().array() += c;
  jac.block(l.eta(), l.vel(), l.n, l.n).diagonal().array() -= 1.0;
  jac.block(l.vel(), l.vel(), l.n, l.n) += c * beam_.mass_matrix();
  jac.block(l.vel(), l.eta(), l.n, l.n) += k;
  return jac;
}

void CoupledModel::linear_operators(const VecX& z, const VecX& z_dot, double t, MatX& E,
                                    MatX& F) const {
  const Layout& l = layout_;
  const int n = size();
  E.resize(n, n);
  F.resize(n, n);
  VecX a = z, b = z_dot;
  for (int j = 0; j < n; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(z(j)));
    a(j) = z(j) + h;
    const VecX rp = residual(a, z_dot, t, false);
    a(j) = z(j) - h;
    const VecX rm = residual(a, z_dot, t, false);
    a(j) = z(j);
    F.col(j) = (rp - rm) / (2 * h);
    const double hd = 1e-6 * std::max(1.0, std::abs(z_dot(j)));
    b(j) = z_dot(j) + hd;
    const VecX dp = residual(z, b, t, false);
    b(j) = z_dot(j) - hd;
    const VecX dm = residual(z, b, t, false);
    b(j) = z_dot(j);
    E.col(j) = (dp - dm) / (2 * hd);
  }
  VecX f;
  MatX k;
  beam_.tangent(z.segment(l.eta(), l.n), f, k);
  E.block(l.eta(), l.eta(), l.n, l.n).diagonal().array() += 1.0;
  F.block(l.eta(), l.vel(), l.n, l.n).diagonal().array() -= 1.0;
  E.block(l.vel(), l.vel(), l.n, l.n) += beam_.mass_matrix();
  F.block(l.vel(), l.eta(), l.n, l.n) += k;
}

VecX CoupledModel::consistent_rates(const VecX& z, double t) const {
  VecX z_dot = VecX::Zero(size());
  for (int it = 0; it < 3; ++it) {
    const VecX r = residual(z, z_dot, t);
    if (r.norm() < 1e-12 * std::max(1.0, z.norm())) break;
    const int n = size();
    MatX E(n, n);
    VecX b = z_dot;
    for (int j = 0; j < n; ++j) {
      const double h = 1e-6;
      b(j) = z_dot(j) + h;
      const VecX rp = residual(z, b, t);
      b(j) = z_dot(j) - h;
      E.col(j) = (rp - residual(z, b, t)) / (2 * h);
      b(j) = z_dot(j);
    }
    z_dot -= E.partialPivLu().solve(r);
  }
  return z_dot;
}

Stepper::Stepper(const CoupledModel& model, SolverSettings settings)
    : model_(model), settings_(settings) {
  settings_.validate();
  roundoff_floor_ = model.force_roundoff();
}

bool Stepper::try_step(const TimePoint& prev, double dt, TimePoint& next, StepStats& stats,
                       std::string& reason) {
  const Layout& l = model_.layout();
  const double beta = settings_.beta, gamma = settings_.gamma;
  const double c = 1.0 / (gamma * dt);
  const int n = model_.size();
  const double t = prev.t + dt;
  auto rates = [&](const VecX& z) {
    return VecX(c * (z - prev.z) - (1.0 - gamma) / gamma * prev.z_dot);
  };
  const VecX eta_pred = prev.z.segment(l.eta(), l.n) + dt * prev.z.segment(l.vel(), l.n) +
                        dt * dt * (0.5 - beta) * prev.z_dot.segment(l.vel(), l.n);
  // Newmark displacement relation replaces the kinematic rows.
  auto newmark_rows = [&](const VecX& z, const VecX& zd) {
    return VecX(z.segment(l.eta(), l.n) - eta_pred -
                dt * dt * beta * zd.segment(l.vel(), l.n));
  };

  VecX z = prev.z;
  z.segment(l.eta(), l.n) = eta_pred + dt * dt * beta * prev.z_dot.segment(l.vel(), l.n);
  z.segment(l.vel(), l.n) += dt * prev.z_dot.segment(l.vel(), l.n);
  for (int j = l.n * 2; j < n; ++j) z(j) += dt * prev.z_dot(j);

  Eigen::PartialPivLU<MatX> lu;
  try {
    for (int it = 0; it < settings_.max_newton_iter; ++it) {
      const VecX zd = rates(z);
      VecX r = model_.residual(z, zd, t);
      r.segment(l.eta(), l.n) = newmark_rows(z, zd);
      const VecX phys = r.tail(n - l.n);
      double scale = 0.0;
      {
        const VecX inertial = model_.beam().mass_matrix() * zd.segment(l.vel(), l.n);
        const VecX internal = model_.beam().internal_force(z.segment(l.eta(), l.n));
        scale = std::max({inertial.norm(), internal.norm(),
                          (r.segment(l.vel(), l.n) - inertial - internal).norm(),
                          model_.total_mass() * zd.segment<3>(l.V()).norm()});
      }
      stats.residual = phys.norm();
      if (!std::isfinite(stats.residual)) {
        reason = "non-finite residual";
        return false;
      }
      if (it > 0 && stats.residual <= std::max({settings_.newton_rel_tol * scale,
                                                settings_.newton_abs_tol, roundoff_floor_})) {
        next.t = t;
        next.z = z;
        next.z.segment<4>(l.quat()) = rigid::normalize_quat(z.segment<4>(l.quat()));
        next.z_dot = rates(z);
        return true;
      }
      if (it % settings_.jacobian_refresh == 0) {
        MatX jac = model_.jacobian(z, zd, t, c);
        jac.middleRows(l.eta(), l.n).setZero();
        jac.block(l.eta(), l.eta(), l.n, l.n).diagonal().setOnes();
        jac.block(l.eta(), l.vel(), l.n, l.n).diagonal().setConstant(-dt * dt * beta * c);
        lu.compute(jac);
        ++stats.jacobian_builds;
      }
      z -= lu.solve(r);
      ++stats.newton_iterations;
    }
    std::ostringstream msg;
    msg << "Newton did not converge in " << settings_.max_newton_iter
        << " iterations (residual " << stats.residual << ")";
    reason = msg.str();
  } catch (const Error& e) {
    reason = e.what();
  }
  return false;
}

TimePoint Stepper::advance(const TimePoint& prev, double dt, int depth, StepStats& stats) {
  TimePoint next;
  std::string reason;
  if (try_step(prev, dt, next, stats, reason)) return next;
  if (depth >= settings_.max_halvings) {
    std::ostringstream msg;
    msg << "time step failed at t = " << prev.t << " after " << depth
        << " halvings (dt = " << dt << "): " << reason;
    throw ConvergenceError(msg.str());
  }
  ++stats.halvings;
  const TimePoint mid = advance(prev, dt / 2, depth + 1, stats);
  return advance(mid, dt / 2, depth + 1, stats);
}

TimePoint Stepper::step(const TimePoint& prev, StepStats* stats) {
  StepStats local;
  TimePoint next = advance(prev, settings_.dt, 0, local);
  if (stats) *stats = local;
  return next;
}

TimeHistory simulate(const CoupledModel& model, const TimePoint& initial, double horizon,
                     const SolverSettings& settings) {
  if (!(horizon >= 0.0)) throw RangeError("horizon must be >= 0");
  const Layout& l = model.layout();
  TimeHistory h;
  auto record = [&](const TimePoint& p) {
    h.t.push_back(p.t);
    const int tip = model.beam().dofs().offset(model.tip_node());
    h.tip_defl.push_back(-p.z(l.eta() + tip + 2));
    h.root_Mx.push_back(model.root_bending_moment(p.z));
    h.alpha_eff_root.push_back(model.evaluate_strip(model.root_strip(), p.z, p.z_dot, p.t).alpha);
    h.pitch.push_back(pitch_angle(p.z.segment<4>(l.quat())));
    h.u.push_back(p.z(l.V()));
    h.w.push_back(p.z(l.V() + 2));
    h.q_rate.push_back(p.z(l.omega() + 1));
    h.altitude.push_back(-p.z(l.pos() + 2));
  };
  Stepper stepper(model, settings);
  TimePoint p = initial;
  record(p);
  const int steps = static_cast<int>(std::llround(horizon / settings.dt));
  for (int i = 0; i < steps; ++i) {
    p = stepper.step(p);
    p.t = initial.t + (i + 1) * settings.dt;
    record(p);
  }
  h.final_state = p;
  return h;
}

}  // namespace aeroflex::coupled
