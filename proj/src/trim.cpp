#include <algorithm>
#include <cmath>

#include "aeroflex/analysis.hpp"

namespace aeroflex::analysis {

using coupled::CoupledModel;
using coupled::ModelOptions;

double rigid_trim_alpha(const ModelOptions& o) {
  const double mass = o.section.mu * 2.0 * o.semi_span + o.fuselage_mass;
  const double q = 0.5 * o.rho * o.U * o.U;
  return mass * kGravity / (q * 2.0 * o.semi_span * o.chord * o.aero.cl_alpha);
}

namespace {

// Structural rows of the rate residual at zero rates, with the external
// (aerodynamic and gravity) part scaled by lambda.
VecX static_residual(const CoupledModel& model, double alpha, const VecX& eta, double lambda,
                     VecX* external = nullptr) {
  const auto& l = model.layout();
  const VecX z = model.level_state(alpha, eta);
  const VecX ext = model.residual(z, VecX::Zero(z.size()), 0.0, false).segment(l.vel(), l.n);
  if (external) *external = ext;
  return model.beam().internal_force(eta) + lambda * ext;
}

// Aerodynamic and gravity loads of a node depend only on the neighbouring
// strips, so the external-load derivative is built with three node colours.
bool chain_mesh(const beam::BeamMesh& mesh) {
  for (const auto& e : mesh.elements) {
    if (std::abs(e[1] - e[0]) != 1) return false;
  }
  return true;
}

MatX static_jacobian(const CoupledModel& model, double alpha, const VecX& eta, double lambda,
                     const VecX& ext0) {
  const int n = model.layout().n;
  const auto& dofs = model.beam().dofs();
  const auto& mesh = model.mesh();
  VecX f;
  MatX k;
  model.beam().tangent(eta, f, k);
  auto column_step = [&](int j) { return 1e-7 * std::max(1.0, std::abs(eta(j))); };
  if (!chain_mesh(mesh)) {
    VecX e = eta;
    for (int j = 0; j < n; ++j) {
      const double h = column_step(j);
      e(j) = eta(j) + h;
      VecX ext;
      static_residual(model, alpha, e, lambda, &ext);
      k.col(j) += lambda * (ext - ext0) / h;
      e(j) = eta(j);
    }
    return k;
  }
  const int nodes = mesh.node_count();
  for (int color = 0; color < 3; ++color) {
    for (int d = 0; d < 6; ++d) {
      VecX e = eta;
      bool any = false;
      for (int i = color; i < nodes; i += 3) {
        const int o = dofs.offset(i);
        if (o < 0) continue;
        e(o + d) += column_step(o + d);
        any = true;
      }
      if (!any) continue;
      VecX ext;
      static_residual(model, alpha, e, lambda, &ext);
      const VecX diff = lambda * (ext - ext0);
      for (int i = color; i < nodes; i += 3) {
        const int o = dofs.offset(i);
        if (o < 0) continue;
        const double h = e(o + d) - eta(o + d);
        for (int j = std::max(0, i - 1); j <= std::min(nodes - 1, i + 1); ++j) {
          const int r = dofs.offset(j);
          if (r >= 0) k.block(r, o + d, 6, 1) += diff.segment<6>(r) / h;
        }
      }
    }
  }
  return k;
}

// Newton at a fixed load level with rotation increments capped. Returns
// false when the iteration does not converge.
bool newton_static(const CoupledModel& model, double alpha, double lambda, VecX& eta,
                   const StaticAeroelasticOptions& s) {
  const double floor = model.force_roundoff();
  const auto& dofs = model.beam().dofs();
  try {
    VecX x = eta;
    for (int it = 0; it <= s.max_iterations; ++it) {
      VecX ext;
      const VecX r = static_residual(model, alpha, x, lambda, &ext);
      if (!r.allFinite()) return false;
      if (r.norm() <= std::max(s.tolerance * std::max(1.0, lambda * ext.norm()), floor)) {
        eta = x;
        return true;
      }
      if (it == s.max_iterations) break;
      VecX step = static_jacobian(model, alpha, x, lambda, ext).partialPivLu().solve(r);
      if (!step.allFinite()) return false;
      double rot = 0.0;
      for (int i = 0; i < model.mesh().node_count(); ++i) {
        const int o = dofs.offset(i);
        if (o >= 0) rot = std::max(rot, step.segment<3>(o + 3).norm());
      }
      if (rot > 0.3) step *= 0.3 / rot;
      x -= step;
    }
  } catch (const Error&) {
  }
  return false;
}

}  // namespace

VecX static_aeroelastic(const CoupledModel& model, double alpha, const VecX& eta_guess,
                        const StaticAeroelasticOptions& s) {
  const int n = model.layout().n;
  VecX eta = eta_guess.size() == n ? eta_guess : VecX::Zero(n);
  VecX trial = eta;
  if (newton_static(model, alpha, 1.0, trial, s)) return trial;

  // Continuation in the load factor from the undeformed wing.
  eta = VecX::Zero(n);
  double lambda = 0.0;
  double step = 0.25;
  int steps = 0;
  while (lambda < 1.0) {
    if (++steps > 4 * s.max_continuation) break;
    const double next = std::min(1.0, lambda + step);
    trial = eta;
    if (newton_static(model, alpha, next, trial, s)) {
      eta = trial;
      lambda = next;
      step = std::min(0.5, 1.5 * step);
    } else {
      step *= 0.5;
      if (step < 1.0 / s.max_continuation) break;
    }
  }
  if (lambda < 1.0) {
    throw ConvergenceError("static aeroelastic equilibrium not found (load factor reached " +
                           std::to_string(lambda) + ")");
  }
  return eta;
}

TrimResult trim_solve(const ModelOptions& options, TrimMode mode, const TrimOptions& s) {
  if (!options.full_aircraft) throw RangeError("trim requires the full aircraft model");
  CoupledModel model(options);
  const auto& l = model.layout();
  const double weight = model.total_mass() * kGravity;
  const double q = 0.5 * options.rho * options.U * options.U;

  TrimResult out;
  out.required_cl = weight / (q * 2.0 * options.semi_span * options.chord);
  out.cl_limit_exceeded = out.required_cl > s.cl_limit;

  double alpha = rigid_trim_alpha(options);
  double thrust = 0.0;
  VecX eta = VecX::Zero(l.n);

  // Body force and moment at (alpha, thrust) with the tail trimmed to zero lift.
  auto loads = [&](double a, VecX& eta_io) {
    if (mode == TrimMode::flexible) eta_io = static_aeroelastic(model, a, eta_io);
    model.set_trim({0.0, 0.0, a});
    const VecX z = model.level_state(a, eta_io);
    return model.total_external(z, VecX::Zero(z.size()), 0.0);
  };

  for (int it = 0; it < s.max_iterations; ++it) {
    out.iterations = it;
    const coupled::Resultant r0 = loads(alpha, eta);
    const Eigen::Vector2d res(r0.force(0) + thrust, r0.force(2));
    out.residual_lift = -r0.force(2) / weight;
    if (res.norm() <= s.tolerance * weight) {
      out.converged = true;
      out.tail_load = -r0.moment(1) / options.tail_arm;
      break;
    }
    const double h = 1e-7;
    VecX eta_h = eta;
    const coupled::Resultant r1 = loads(alpha + h, eta_h);
    Eigen::Matrix2d jac;
    jac << (r1.force(0) - r0.force(0)) / h, 1.0,
           (r1.force(2) - r0.force(2)) / h, 0.0;
    const Eigen::Vector2d d = jac.fullPivLu().solve(-res);
    if (!d.allFinite()) break;
    alpha += std::clamp(d(0), -0.1, 0.1);
    thrust += d(1);
  }
  if (!out.converged) {
    // One last evaluation so the reported residuals match the final iterate.
    const coupled::Resultant r = loads(alpha, eta);
    out.residual_lift = -r.force(2) / weight;
    out.converged = std::abs(r.force(0) + thrust) <= s.tolerance * weight &&
                    std::abs(r.force(2)) <= s.tolerance * weight;
    out.tail_load = -r.moment(1) / options.tail_arm;
  }
  out.alpha_trim = alpha;
  out.thrust_trim = thrust;
  out.eta_trim = eta;
  model.set_trim({thrust, out.tail_load * options.tail_arm, alpha});
  out.state = model.level_state(alpha, eta);
  const coupled::Resultant fin = model.total_external(out.state, VecX::Zero(out.state.size()), 0.0);
  out.residual_moment = fin.moment(1) / (weight * options.chord);
  const int tip = model.beam().dofs().offset(model.tip_node());
  out.tip_deflection = -eta(tip + 2);
  return out;
}

CoupledModel trimmed_model(const ModelOptions& options, const TrimResult& trim) {
  CoupledModel model(options);
  model.set_trim({trim.thrust_trim, trim.tail_load * options.tail_arm, trim.alpha_trim});
  return model;
}

}  // namespace aeroflex::analysis
