#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aeroflex/coupled.hpp"
#include "aeroflex/types.hpp"

namespace aeroflex::analysis {

using Complex = std::complex<double>;
using VecXc = Eigen::VectorXcd;

// ---------------------------------------------------------------- trim

enum class TrimMode { rigid, flexible };

struct TrimOptions {
  int max_iterations = 30;
  double tolerance = 1e-10;  // on |F| / W for both force balances
  double cl_limit = 1.2;
};

struct TrimResult {
  double alpha_trim = 0.0;
  double thrust_trim = 0.0;
  VecX eta_trim;
  VecX state;  // packed trimmed state, zero rates
  double tail_load = 0.0;  // tail couple / tail arm
  bool converged = false;
  bool cl_limit_exceeded = false;
  double residual_lift = 0.0;    // (L - W) / W
  double residual_moment = 0.0;  // M_cg / (W c)
  int iterations = 0;
  double tip_deflection = 0.0;  // upward, m
  double required_cl = 0.0;
};

/// Level-flight trim of the free-flying aircraft on (alpha, thrust). The
/// pitching moment is closed by the tail couple; the tail incidence is set
/// so that it carries no lift in trim. In flexible mode the static
/// aeroelastic deformation is reconverged at every iterate; rigid mode
/// keeps the structure undeformed.
TrimResult trim_solve(const coupled::ModelOptions& options, TrimMode mode,
                      const TrimOptions& settings = {});

/// Model with the trim inputs of a converged result applied.
coupled::CoupledModel trimmed_model(const coupled::ModelOptions& options,
                                    const TrimResult& trim);

struct StaticAeroelasticOptions {
  double tolerance = 1e-9;  // on |r| relative to the aerodynamic load
  int max_iterations = 40;
  int max_continuation = 64;
};

/// Structural equilibrium of the wing at fixed body incidence alpha and
/// steady lag states. Starts from eta_guess (or the undeformed wing) and
/// falls back to continuation in the aerodynamic load when Newton stalls.
VecX static_aeroelastic(const coupled::CoupledModel& model, double alpha,
                        const VecX& eta_guess,
                        const StaticAeroelasticOptions& settings = {});

// ------------------------------------------------------ linear stability

/// Linearization E dz_dot + F dz = 0 about an equilibrium, restricted to the
/// dynamic states. M_T, C_T and K_tan are the structural second-order blocks.
struct LinearSystem {
  std::vector<int> states;  // indices into the packed state
  MatX E;
  MatX F;
  MatX M_T;
  MatX C_T;
  MatX K_tan;
  coupled::Layout layout;
  bool full_aircraft = false;
};

struct LinearizeOptions {
  // Reject inputs whose rate residual exceeds this (relative to the force
  // scale); negative disables the check, e.g. for undeformed references.
  double equilibrium_tolerance = 1e-8;
};

LinearSystem linearize(const coupled::CoupledModel& model, const VecX& equilibrium,
                       const LinearizeOptions& settings = {});

struct EigenMode {
  Complex lambda;
  VecXc vector;  // over LinearSystem::states
  double frequency = 0.0;  // |Im|, rad/s
  double damping_ratio = 0.0;
  std::string label;
};

/// Eigenvalues of -E^-1 F sorted by |Im| (then Re); of each conjugate pair
/// only the member with Im > 0 is kept.
std::vector<EigenMode> eigen_modes(const LinearSystem& system);

/// Companion-form roots of M x'' + C x' + K x = 0, same ordering.
std::vector<EigenMode> quadratic_eigenvalues(const MatX& M, const MatX& C, const MatX& K);

// ---------------------------------------------------------------- flutter

enum class FlutterBasis { undeformed, prestressed };

struct FlutterOptions {
  FlutterBasis basis = FlutterBasis::undeformed;
  double v_start = 5.0;
  double v_step = 1.0;
  double v_max = 100.0;
  double tolerance = 0.01;
  // Aeroelastic band: higher-frequency structural modes are outside the
  // strip-theory validity range and only contribute round-off.
  double max_frequency = 300.0;
  // Root incidence of the prestressed equilibrium; unset uses the rigid
  // level-flight trim incidence at the model's design speed.
  std::optional<double> alpha_root;
  bool gravity = false;
};

struct FlutterSample {
  double V = 0.0;
  double max_real = 0.0;
  double frequency = 0.0;
};

struct FlutterResult {
  bool found = false;
  bool unstable_at_start = false;  // positive real part at the first speed
  double V_f = 0.0;
  double flutter_frequency = 0.0;
  FlutterBasis basis = FlutterBasis::undeformed;
  int critical_mode_id = -1;  // index in the sorted mode list at V_f
  std::string critical_mode;
  std::vector<FlutterSample> damping_trace;
  double alpha_root = 0.0;
};

/// V-g sweep of the clamped semi-span wing (model options with
/// full_aircraft = false are used as given; U is varied).
FlutterResult flutter_speed(const coupled::ModelOptions& options,
                            const FlutterOptions& settings = {});

/// Largest real part in the aeroelastic band at airspeed V.
FlutterSample flutter_sample(const coupled::ModelOptions& options, double V,
                             const FlutterOptions& settings, VecX* eta_guess = nullptr,
                             std::vector<EigenMode>* modes = nullptr);

// ------------------------------------------------------- lift rotation

struct LiftRotation {
  double F_z = 0.0;      // sum L cos(Gamma) ds
  double total = 0.0;    // sum L ds
  double deficit = 0.0;  // sum L (1 - cos(Gamma)) ds
  double F_y_right = 0.0;
  double F_y_left = 0.0;
  double F_y = 0.0;      // body y, both semi-spans
  std::vector<double> span;   // element midpoint y
  std::vector<double> gamma;  // local dihedral, rad
};

/// lifts holds the lift per unit length of every element.
LiftRotation lift_rotation_diagnostics(const beam::BeamMesh& mesh,
                                       const std::vector<beam::NodalState>& states,
                                       const std::vector<double>& lifts);

// ------------------------------------------------------ flight modes

struct ClassifiedMode {
  EigenMode mode;
  std::string label;  // phugoid, short_period, structural, aero_lag, lateral, mixed, rigid_zero
  double rigid_energy_fraction = 0.0;
  double pitch_fraction = 0.0;
};

struct FlightModes {
  std::vector<ClassifiedMode> modes;
  std::optional<EigenMode> phugoid;
  std::optional<EigenMode> short_period;
};

FlightModes classify_flight_modes(const coupled::CoupledModel& model,
                                  const LinearSystem& system,
                                  const std::vector<EigenMode>& modes);

// ---------------------------------------------------------------- gust

struct GustOptions {
  aero::GustSpec gust;
  double horizon = 6.0;
  coupled::SolverSettings solver;
};

struct GustRun {
  TrimResult trim;
  coupled::TimeHistory history;
  double peak_root_moment = 0.0;  // max |root_Mx|
  double peak_tip_deflection = 0.0;
};

GustRun gust_response(const coupled::ModelOptions& options, const GustOptions& settings);

// ---------------------------------------------------------------- sweep

struct StageStatus {
  bool ok = false;
  std::string error;
};

struct SweepRecord {
  double sigma = 0.0;
  double alpha_trim = 0.0;
  double tip_deflection_over_span = 0.0;
  double V_f_undeformed = 0.0;
  double V_f_prestressed = 0.0;
  Complex phugoid_eigenvalue;
  Complex short_period_eigenvalue;
  double gust_peak_root_moment = 0.0;
  double gust_peak_tip_deflection = 0.0;
  StageStatus trim, modes, flutter_undeformed, flutter_prestressed, gust;
};

struct SweepOptions {
  std::vector<double> sigmas{0.001, 0.01, 0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  FlutterOptions flutter;
  GustOptions gust;
  bool run_flutter = true;
  bool run_gust = true;
  int jobs = 1;
};

/// One record per sigma, in input order. Stage failures are recorded and
/// the remaining stages still run where they do not depend on the failure.
/// on_record is called in input order as records complete.
std::vector<SweepRecord> sigma_sweep(
    const coupled::ModelOptions& options, const SweepOptions& settings,
    const std::function<void(const SweepRecord&)>& on_record = {});

/// Wing-only version of the aircraft options for flutter analysis.
coupled::ModelOptions flutter_options(const coupled::ModelOptions& aircraft);

/// Closed-form rigid trim incidence W / (q S cl_alpha).
double rigid_trim_alpha(const coupled::ModelOptions& options);

}  // namespace aeroflex::analysis
