#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aeroflex/aero.hpp"
#include "aeroflex/beam.hpp"
#include "aeroflex/rigid_body.hpp"
#include "aeroflex/types.hpp"

namespace aeroflex::coupled {

struct ModelOptions {
  double sigma = 1.0;
  double semi_span = 16.0;
  double chord = 1.0;
  double elastic_axis = 0.0;  // a, semi-chords aft of mid-chord
  int elements_per_semispan = 16;
  // Free-flying aircraft; false gives a root-clamped semi-span wing flying
  // at a fixed root incidence alpha0 with the rigid-body states frozen.
  bool full_aircraft = true;
  double fuselage_mass = 50.0;
  double U = 25.0;
  double rho = 0.0889;
  double altitude = 20000.0;
  double alpha0 = 0.0;
  bool gravity = true;
  bool aerodynamics = true;
  // Idealized massless tail behind the reference point.
  double tail_arm = 5.0;
  double tail_area = 2.5;
  beam::CrossSection section = beam::CrossSection::baseline();
  aero::AeroConstants aero;

  void validate() const;
};

/// Trim quantities held fixed during a simulation or linearization.
struct TrimInputs {
  double thrust = 0.0;
  double tail_moment = 0.0;     // pure pitching couple closing M_cg = 0
  double tail_alpha_ref = 0.0;  // tail incidence at which its lift is zero
};

struct CoupledState {
  VecX eta;
  VecX eta_dot;
  VecX x_a;
  Vec3 V_B = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  Vec4 q = Vec4(1, 0, 0, 0);
  Vec3 p_cg = Vec3::Zero();
};

/// Packs [eta, eta_dot, x_a, V_B, omega, q, p_cg].
VecX pack_state(const CoupledState& parts);
CoupledState unpack_state(const VecX& x, int n_structural, int n_strips);

/// Offsets of the partitions in a packed state.
struct Layout {
  int n = 0;
  int strips = 0;
  int eta() const { return 0; }
  int vel() const { return n; }
  int aero() const { return 2 * n; }
  int V() const { return 2 * n + 4 * strips; }
  int omega() const { return V() + 3; }
  int quat() const { return V() + 6; }
  int pos() const { return V() + 10; }
  int size() const { return V() + 13; }
};

/// Per-unit-length strip load in strip axes (aft chordwise, spanwise,
/// normal) plus the pitching moment about the spanwise axis.
struct StripLoadVector {
  Vec3 force = Vec3::Zero();
  double moment = 0.0;
};

/// Strip axes of element e in body axes for the deformed state.
Mat3 strip_frame(const beam::BeamMesh& mesh, int e,
                 const std::vector<beam::NodalState>& states);

struct Resultant {
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();  // about the body origin
};

/// Integrates strip loads over the deformed wing in body axes.
Resultant integrated_aero_loads(const beam::BeamMesh& mesh,
                                const std::vector<beam::NodalState>& states,
                                const std::vector<StripLoadVector>& loads);

struct StripResult {
  double alpha = 0.0;
  double U = 0.0;
  double w34 = 0.0;
  double w_gust = 0.0;
  aero::StripLoads loads;
  Vec3 force_body = Vec3::Zero();   // per unit length
  Vec3 moment_body = Vec3::Zero();  // per unit length, about the strip point
  Vec3 position = Vec3::Zero();
  Vec4 lag_rates = Vec4::Zero();
};

struct SolverSettings {
  double beta = 0.25;
  double gamma = 0.5;
  double dt = 0.01;
  double newton_rel_tol = 1e-8;
  double newton_abs_tol = 1e-12;
  int max_newton_iter = 25;
  int max_halvings = 4;
  // Newton iterations between Jacobian rebuilds (1 = full Newton).
  int jacobian_refresh = 1;

  void validate() const;
};

class CoupledModel {
 public:
  explicit CoupledModel(ModelOptions options);

  const ModelOptions& options() const { return options_; }
  const beam::BeamModel& beam() const { return beam_; }
  const beam::BeamMesh& mesh() const { return beam_.mesh(); }
  const Layout& layout() const { return layout_; }
  int size() const { return layout_.size(); }
  int strip_count() const { return layout_.strips; }
  double total_mass() const { return mass_; }
  const Mat3& J0() const { return J0_; }
  aero::StripGeometry strip_geometry(int e) const;

  void set_trim(const TrimInputs& trim) { trim_ = trim; }
  const TrimInputs& trim() const { return trim_; }
  void set_gust(std::optional<aero::GustSpec> gust) { gust_ = gust; }

  /// Level-flight state at body incidence alpha (pitch = alpha) and
  /// structural displacement eta, lag states at their steady values.
  VecX level_state(double alpha, const VecX& eta) const;

  /// Continuous residual G(z, z_dot, t) = 0. Structural rows are
  /// M eta_ddot + f_int(eta) - f_ext; with include_elastic = false the
  /// M eta_ddot + f_int terms and the kinematic identity are left out.
  VecX residual(const VecX& z, const VecX& z_dot, double t,
                bool include_elastic = true) const;

  StripResult evaluate_strip(int e, const VecX& z, const VecX& z_dot,
                             double t) const;

  /// Lag states that make all lag rates vanish for the current kinematics.
  VecX steady_lag_states(const VecX& z, double t = 0.0) const;

  Resultant aero_resultant(const VecX& z, const VecX& z_dot, double t) const;

  /// Body-frame force and moment on the aircraft excluding m (V_dot + w x V).
  Resultant total_external(const VecX& z, const VecX& z_dot, double t) const;

  /// Root out-of-plane bending moment of the right (or only) semi-span.
  double root_bending_moment(const VecX& z) const;
  int tip_node() const;
  /// Cancellation error of the internal forces, of order eps * EA / sigma
  /// per element; residuals cannot be driven below it.
  double force_roundoff() const;
  int root_strip() const;

  std::vector<beam::NodalState> nodal_states(const VecX& z,
                                             const VecX& z_dot) const;

  /// Consistent z_dot for a state: solves G(z, z_dot, t) = 0 for z_dot.
  VecX consistent_rates(const VecX& z, double t) const;

  /// dG/dz + c dG/dz_dot with the structural tangent from the beam model and
  /// the remainder by forward differences.
  MatX jacobian(const VecX& z, const VecX& z_dot, double t, double c) const;

  /// dG/dz_dot and dG/dz by central differences (structural part exact).
  void linear_operators(const VecX& z, const VecX& z_dot, double t, MatX& E,
                        MatX& F) const;

 private:
  std::vector<StripResult> strips(const std::vector<beam::NodalState>& states,
                                  const VecX& z, const VecX& z_dot, double t) const;
  VecX structural_loads(const std::vector<beam::NodalState>& states,
                        const std::vector<StripResult>& strips, const VecX& z,
                        const VecX& z_dot) const;
  Resultant rigid_loads(const std::vector<StripResult>& strips,
                        const VecX& z) const;

  ModelOptions options_;
  beam::BeamModel beam_;
  Layout layout_;
  double mass_ = 0.0;
  Mat3 J0_ = Mat3::Identity();
  TrimInputs trim_;
  std::optional<aero::GustSpec> gust_;
  std::vector<double> node_mass_;
};

struct TimePoint {
  double t = 0.0;
  VecX z;
  VecX z_dot;
};

struct StepStats {
  int newton_iterations = 0;
  int jacobian_builds = 0;
  int halvings = 0;
  double residual = 0.0;
};

/// Implicit Newmark (structural) / trapezoidal (first-order states) stepper
/// with Newton iterations and failure-driven step halving.
class Stepper {
 public:
  Stepper(const CoupledModel& model, SolverSettings settings);

  TimePoint step(const TimePoint& prev, StepStats* stats = nullptr);

 private:
  bool try_step(const TimePoint& prev, double dt, TimePoint& next,
                StepStats& stats, std::string& reason);
  TimePoint advance(const TimePoint& prev, double dt, int depth,
                    StepStats& stats);

  const CoupledModel& model_;
  SolverSettings settings_;
  double roundoff_floor_ = 0.0;
};

struct TimeHistory {
  std::vector<double> t;
  std::vector<double> tip_defl;
  std::vector<double> root_Mx;
  std::vector<double> alpha_eff_root;
  std::vector<double> pitch;
  std::vector<double> u;
  std::vector<double> w;
  std::vector<double> q_rate;
  std::vector<double> altitude;
  TimePoint final_state;

  std::size_t size() const { return t.size(); }
};

/// Marches from the initial point over the horizon, recording channels at
/// every step (including the initial point).
TimeHistory simulate(const CoupledModel& model, const TimePoint& initial,
                     double horizon, const SolverSettings& settings);

/// Pitch angle of a body-to-inertial quaternion.
double pitch_angle(const Vec4& q);

}  // namespace aeroflex::coupled
