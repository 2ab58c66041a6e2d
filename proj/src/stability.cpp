#include <algorithm>
#include <cmath>
#include <limits>

#include "aeroflex/analysis.hpp"

namespace aeroflex::analysis {

using coupled::CoupledModel;
using coupled::ModelOptions;

LinearSystem linearize(const CoupledModel& model, const VecX& z, const LinearizeOptions& s) {
  const auto& l = model.layout();
  if (z.size() != model.size()) throw DimensionError("linearize: state length mismatch");
  const VecX zero = VecX::Zero(z.size());
  if (s.equilibrium_tolerance >= 0.0) {
    // Position rates are the flight path and are excluded.
    const VecX r = model.residual(z, zero, 0.0).head(l.pos());
    const double scale = std::max({1.0, model.total_mass() * kGravity,
                                   model.beam().internal_force(z.segment(l.eta(), l.n)).norm()});
    if (r.norm() > s.equilibrium_tolerance * scale + model.force_roundoff()) {
      throw RangeError("linearize: state is not an equilibrium (residual " +
                       std::to_string(r.norm()) + ")");
    }
  }
  MatX E, F;
  model.linear_operators(z, zero, 0.0, E, F);

  LinearSystem sys;
  sys.layout = l;
  sys.full_aircraft = model.options().full_aircraft;
  for (int i = 0; i < 2 * l.n; ++i) sys.states.push_back(i);
  if (model.options().aerodynamics) {
    for (int i = l.aero(); i < l.V(); ++i) sys.states.push_back(i);
  }
  if (sys.full_aircraft) {
    for (int i = l.V(); i < l.pos(); ++i) sys.states.push_back(i);
  }
  const int m = static_cast<int>(sys.states.size());
  sys.E.resize(m, m);
  sys.F.resize(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      sys.E(i, j) = E(sys.states[i], sys.states[j]);
      sys.F(i, j) = F(sys.states[i], sys.states[j]);
    }
  }
  sys.M_T = E.block(l.vel(), l.vel(), l.n, l.n);
  sys.C_T = F.block(l.vel(), l.vel(), l.n, l.n);
  sys.K_tan = F.block(l.vel(), l.eta(), l.n, l.n);
  return sys;
}

namespace {

std::vector<EigenMode> modes_of(const MatX& A) {
  Eigen::EigenSolver<MatX> es(A, true);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigenvalue solver failed");
  std::vector<EigenMode> out;
  const auto& values = es.eigenvalues();
  for (int i = 0; i < values.size(); ++i) {
    const Complex lam = values(i);
    const double tiny = 1e-9 * std::max(1.0, std::abs(lam));
    if (lam.imag() < -tiny) continue;
    EigenMode m;
    m.lambda = std::abs(lam.imag()) <= tiny ? Complex(lam.real(), 0.0) : lam;
    m.vector = es.eigenvectors().col(i);
    // Fix the phase so the largest component is real and positive.
    Eigen::Index k;
    m.vector.cwiseAbs().maxCoeff(&k);
    if (std::abs(m.vector(k)) > 0.0) m.vector *= std::conj(m.vector(k)) / std::abs(m.vector(k));
    m.vector.normalize();
    m.frequency = std::abs(m.lambda.imag());
    m.damping_ratio = std::abs(m.lambda) > 0.0 ? -m.lambda.real() / std::abs(m.lambda) : 0.0;
    out.push_back(std::move(m));
  }
  std::stable_sort(out.begin(), out.end(), [](const EigenMode& a, const EigenMode& b) {
    if (a.frequency != b.frequency) return a.frequency < b.frequency;
    return a.lambda.real() < b.lambda.real();
  });
  return out;
}

}  // namespace

std::vector<EigenMode> eigen_modes(const LinearSystem& sys) {
  if (sys.E.rows() != sys.F.rows() || sys.E.cols() != sys.F.cols() ||
      sys.E.rows() != sys.E.cols()) {
    throw DimensionError("eigen_modes: inconsistent matrices");
  }
  const Eigen::FullPivLU<MatX> lu(sys.E);
  if (!lu.isInvertible()) throw ConstraintError("eigen_modes: singular mass partition");
  return modes_of(-lu.solve(sys.F));
}

std::vector<EigenMode> quadratic_eigenvalues(const MatX& M, const MatX& C, const MatX& K) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n || C.rows() != n || C.cols() != n || K.rows() != n || K.cols() != n) {
    throw DimensionError("quadratic_eigenvalues: matrices must be square and equal size");
  }
  LinearSystem sys;
  sys.E = MatX::Identity(2 * n, 2 * n);
  sys.E.bottomRightCorner(n, n) = M;
  sys.F = MatX::Zero(2 * n, 2 * n);
  sys.F.topRightCorner(n, n) = -MatX::Identity(n, n);
  sys.F.bottomLeftCorner(n, n) = K;
  sys.F.bottomRightCorner(n, n) = C;
  return eigen_modes(sys);
}

// ---------------------------------------------------------------- flutter

ModelOptions flutter_options(const ModelOptions& aircraft) {
  ModelOptions o = aircraft;
  o.full_aircraft = false;
  return o;
}

FlutterSample flutter_sample(const ModelOptions& options, double V, const FlutterOptions& s,
                             VecX* eta_guess, std::vector<EigenMode>* modes_out) {
  ModelOptions o = options;
  o.U = V;
  o.gravity = s.gravity;
  const CoupledModel model(o);
  const auto& l = model.layout();
  VecX z;
  LinearizeOptions lin;
  if (s.basis == FlutterBasis::prestressed) {
    const double alpha = s.alpha_root ? *s.alpha_root : rigid_trim_alpha(options);
    const VecX guess = eta_guess ? *eta_guess : VecX();
    const VecX eta = static_aeroelastic(model, alpha, guess);
    if (eta_guess) *eta_guess = eta;
    z = model.level_state(alpha, eta);
  } else {
    // The undeformed wing at zero incidence still carries profile drag, so
    // it is a linearization reference rather than an equilibrium.
    z = model.level_state(0.0, VecX::Zero(l.n));
    lin.equilibrium_tolerance = -1.0;
  }
  const LinearSystem sys = linearize(model, z, lin);
  std::vector<EigenMode> modes = eigen_modes(sys);
  FlutterSample out;
  out.V = V;
  out.max_real = -std::numeric_limits<double>::infinity();
  for (const auto& m : modes) {
    if (std::abs(m.lambda) > s.max_frequency) continue;
    if (m.lambda.real() > out.max_real) {
      out.max_real = m.lambda.real();
      out.frequency = m.frequency;
    }
  }
  if (modes_out) *modes_out = std::move(modes);
  return out;
}

FlutterResult flutter_speed(const ModelOptions& options, const FlutterOptions& s) {
  if (!(options.sigma > 0.0)) throw RangeError("sigma must be > 0");
  if (!(s.v_step > 0.0 && s.tolerance > 0.0 && s.v_max > s.v_start && s.v_start > 0.0)) {
    throw RangeError("invalid flutter sweep settings");
  }
  const ModelOptions wing = options.full_aircraft ? flutter_options(options) : options;
  FlutterResult out;
  out.basis = s.basis;
  out.alpha_root = s.basis == FlutterBasis::prestressed
                       ? (s.alpha_root ? *s.alpha_root : rigid_trim_alpha(options))
                       : 0.0;
  FlutterOptions fs = s;
  fs.alpha_root = out.alpha_root;
  VecX eta;
  VecX* guess = s.basis == FlutterBasis::prestressed ? &eta : nullptr;

  // First negative-to-positive change of the largest real part; an
  // instability already present at the start of the range is flagged but is
  // not a crossing.
  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  bool seen_stable = false;
  VecX eta_lo;
  for (int k = 0;; ++k) {
    const double V = s.v_start + k * s.v_step;
    if (V > s.v_max + 1e-9) break;
    const FlutterSample smp = flutter_sample(wing, V, fs, guess);
    out.damping_trace.push_back(smp);
    if (smp.max_real > 0.0) {
      if (seen_stable) {
        hi = V;
        lo = V - s.v_step;
        bracketed = true;
        break;
      }
      out.unstable_at_start = true;
    } else {
      seen_stable = true;
      if (guess) eta_lo = eta;
    }
  }
  if (!bracketed) return out;
  while (hi - lo > s.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (guess) eta = eta_lo;
    const FlutterSample smp = flutter_sample(wing, mid, fs, guess);
    out.damping_trace.push_back(smp);
    if (smp.max_real > 0.0) {
      hi = mid;
    } else {
      lo = mid;
      if (guess) eta_lo = eta;
    }
  }
  out.found = true;
  out.V_f = 0.5 * (lo + hi);
  std::vector<EigenMode> modes;
  if (guess) eta = eta_lo;
  const FlutterSample crit = flutter_sample(wing, hi, fs, guess, &modes);
  out.flutter_frequency = crit.frequency;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (std::abs(modes[i].lambda) <= s.max_frequency && modes[i].lambda.real() == crit.max_real) {
      out.critical_mode_id = static_cast<int>(i);
      out.critical_mode = modes[i].frequency > 0.0 ? "oscillatory" : "divergence";
      break;
    }
  }
  std::stable_sort(out.damping_trace.begin(), out.damping_trace.end(),
                   [](const FlutterSample& a, const FlutterSample& b) { return a.V < b.V; });
  return out;
}

// ------------------------------------------------------- lift rotation

LiftRotation lift_rotation_diagnostics(const beam::BeamMesh& mesh,
                                       const std::vector<beam::NodalState>& states,
                                       const std::vector<double>& lifts) {
  if (static_cast<int>(states.size()) != mesh.node_count() ||
      static_cast<int>(lifts.size()) != mesh.element_count()) {
    throw DimensionError("lift_rotation_diagnostics: size mismatch");
  }
  LiftRotation out;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto [a, b] = mesh.elements[e];
    const Vec3 xa = mesh.nodes[a] + states[a].u;
    const Vec3 xb = mesh.nodes[b] + states[b].u;
    const double mid = 0.5 * (mesh.nodes[a](1) + mesh.nodes[b](1));
    const double side = mid >= 0.0 ? 1.0 : -1.0;
    // Rise (-z) per outboard run along the span.
    Vec3 d = xb - xa;
    if (side * (mesh.nodes[b](1) - mesh.nodes[a](1)) < 0.0) d = -d;
    const double run = side * d(1);
    const double rise = -d(2);
    const double gamma = std::atan2(rise, run);
    const double ds = mesh.element_length(e);
    const double l = lifts[e] * ds;
    out.span.push_back(mid);
    out.gamma.push_back(gamma);
    out.total += l;
    out.F_z += l * std::cos(gamma);
    out.deficit += l * (1.0 - std::cos(gamma));
    // Inboard lateral component.
    const double fy = -side * l * std::sin(gamma);
    (side > 0 ? out.F_y_right : out.F_y_left) += fy;
  }
  out.F_y = out.F_y_right + out.F_y_left;
  return out;
}

// ------------------------------------------------------ flight modes

namespace {

struct Energies {
  double structural = 0.0;
  double surge = 0.0;
  double heave = 0.0;
  double pitch = 0.0;
  double lateral = 0.0;
  double lag_share = 0.0;
};

}  // namespace

FlightModes classify_flight_modes(const CoupledModel& model, const LinearSystem& sys,
                                  const std::vector<EigenMode>& modes) {
  if (!sys.full_aircraft) throw RangeError("flight-mode classification needs the full aircraft");
  const auto& l = sys.layout;
  std::vector<int> where(l.size(), -1);
  for (std::size_t i = 0; i < sys.states.size(); ++i) where[sys.states[i]] = static_cast<int>(i);
  const MatX& M = model.beam().mass_matrix();
  const double m = model.total_mass();
  const Mat3& J = model.J0();

  // Vacuum modes for structural affinity labels.
  const auto vac = beam::modal_frequencies(model.mesh(), model.options().sigma,
                                           std::min(12, l.n));

  FlightModes out;
  std::vector<Energies> en;
  for (const auto& mode : modes) {
    const VecXc& v = mode.vector;
    auto at = [&](int idx) { return where[idx] >= 0 ? v(where[idx]) : Complex(0.0); };
    Energies e;
    VecXc vel(l.n);
    for (int i = 0; i < l.n; ++i) vel(i) = at(l.vel() + i);
    e.structural = std::abs(vel.dot(M * vel));
    const Complex u = at(l.V()), vy = at(l.V() + 1), w = at(l.V() + 2);
    const Complex p = at(l.omega()), q = at(l.omega() + 1), r = at(l.omega() + 2);
    e.surge = m * std::norm(u);
    e.heave = m * std::norm(w);
    e.pitch = J(1, 1) * std::norm(q);
    e.lateral = m * std::norm(vy) + J(0, 0) * std::norm(p) + J(2, 2) * std::norm(r);
    double lag = 0.0;
    for (int i = l.aero(); i < l.V(); ++i) lag += std::norm(at(i));
    e.lag_share = lag / std::max(v.squaredNorm(), 1e-300);
    en.push_back(e);
  }

  std::vector<ClassifiedMode> cls;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const Energies& e = en[i];
    ClassifiedMode c;
    c.mode = modes[i];
    const double rigid = e.surge + e.heave + e.pitch + e.lateral;
    const double total = rigid + e.structural;
    c.rigid_energy_fraction = total > 0.0 ? rigid / total : 0.0;
    c.pitch_fraction = rigid > 0.0 ? (e.pitch + e.heave) / rigid : 0.0;
    if (std::abs(modes[i].lambda) < 1e-6) {
      c.label = "rigid_zero";
    } else if (e.lag_share > 0.9 || total == 0.0) {
      c.label = "aero_lag";
    } else if (std::abs(rigid - e.structural) < 0.1 * total) {
      c.label = "mixed";
    } else if (rigid > e.structural) {
      c.label = e.lateral > 0.5 * rigid ? "lateral" : "longitudinal";
    } else {
      // Beam-mode affinity through the mass-weighted projection.
      VecXc d(l.n);
      for (int k = 0; k < l.n; ++k) {
        d(k) = where[l.eta() + k] >= 0 ? modes[i].vector(where[l.eta() + k]) : Complex(0.0);
      }
      double best = -1.0;
      std::string name = "structural";
      for (const auto& vm : vac) {
        const double a = std::abs(vm.shape.cast<Complex>().dot(M * d)) /
                         std::sqrt(std::abs(vm.shape.dot(M * vm.shape)));
        if (a > best) {
          best = a;
          name = "structural (" + vm.label + ")";
        }
      }
      c.label = name;
    }
    cls.push_back(std::move(c));
  }

  // Phugoid: slowest oscillatory longitudinal rigid mode dominated by surge.
  int phugoid = -1;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    if (cls[i].label != "longitudinal" || cls[i].mode.frequency <= 0.0) continue;
    if (en[i].surge < en[i].pitch) continue;
    phugoid = static_cast<int>(i);
    break;
  }
  if (phugoid >= 0) {
    cls[phugoid].label = "phugoid";
    out.phugoid = cls[phugoid].mode;
  }
  // Short period: the most pitch/heave dominated remaining longitudinal mode.
  int sp = -1;
  double best = 0.0;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    if (cls[i].label != "longitudinal") continue;
    if (cls[i].pitch_fraction > best) {
      best = cls[i].pitch_fraction;
      sp = static_cast<int>(i);
    }
  }
  if (sp >= 0) {
    cls[sp].label = "short_period";
    out.short_period = cls[sp].mode;
  }
  for (auto& c : cls) c.mode.label = c.label;
  out.modes = std::move(cls);
  return out;
}

}  // namespace aeroflex::analysis
