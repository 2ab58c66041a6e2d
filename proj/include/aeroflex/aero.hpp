#pragma once

#include <complex>

#include "aeroflex/types.hpp"

namespace aeroflex::aero {

struct AeroConstants {
  // Wagner indicial response (Jones approximation).
  double psi1 = 0.165;
  double psi2 = 0.335;
  double eps1 = 0.0455;
  double eps2 = 0.3;
  // Kussner sharp-edged gust response.
  double phi1 = 0.5792;
  double phi2 = 0.4208;
  double beta1 = 0.1393;
  double beta2 = 1.802;
  double cd0 = 0.01;
  double e0 = 0.95;
  double cl_alpha = 2.0 * kPi;
  double aspect_ratio = 32.0;
};

/// Strip geometry. R_c maps strip axes (aft chordwise, spanwise, normal) to
/// the frame the velocities are given in.
struct StripGeometry {
  double s = 0.0;
  double b = 0.5;
  double c = 1.0;
  double a = 0.0;
  double ds = 1.0;
  Mat3 R_c = Mat3::Identity();
};

/// Wagner lag states (x1, x2) and Kussner lag states (xg1, xg2).
struct AeroStripState {
  double x1 = 0.0;
  double x2 = 0.0;
  double xg1 = 0.0;
  double xg2 = 0.0;
  double w34 = 0.0;
};

/// 1-minus-cosine vertical gust.
struct GustSpec {
  double w_g0 = 5.0;
  double H_g = 25.0;
  double t0 = 1.0;

  void validate() const;
};

struct StripKinematics {
  double h_dot = 0.0;
  double h_ddot = 0.0;
  double alpha = 0.0;
  double alpha_dot = 0.0;
  double alpha_ddot = 0.0;
  double U = 25.0;
  // In-plane speed for the drag polar; U is used when not positive.
  double V = 0.0;
};

struct StripLoads {
  double L = 0.0;
  double M = 0.0;  // about the elastic axis, nose up positive
  double D = 0.0;
  double cl = 0.0;
};

double wagner_phi(double tau, const AeroConstants& k = {});
double kussner_psi(double tau, const AeroConstants& k = {});

/// Rational (Jones) approximation of the Theodorsen function.
std::complex<double> theodorsen_jones(double k, const AeroConstants& c = {});

/// Relative air velocity at a strip in strip axes:
/// R_c^T (R_zeta^T V_inf - v_body - u_dot).
Vec3 effective_velocity(const StripGeometry& strip, const Vec3& V_inf,
                        const Mat3& R_zeta, const Vec3& v_body,
                        const Vec3& u_dot);

/// atan2(V3, V1); throws DegenerateFlowError when V1 vanishes.
double effective_aoa(const Vec3& V_eff);

/// Three-quarter-chord downwash h_dot + U alpha + b (1/2 - a) alpha_dot.
double downwash_34(const StripGeometry& strip, const StripKinematics& kin);

/// Rates of (x1, x2, xg1, xg2).
Vec4 aero_state_rates(const AeroStripState& state, double w34, double w_gust,
                      double U, double b, const AeroConstants& k = {});

StripLoads strip_loads(const StripGeometry& strip, const StripKinematics& kin,
                       const AeroStripState& state, const AeroConstants& k,
                       double rho);

double gust_velocity(double t, const GustSpec& spec, double U);

}  // namespace aeroflex::aero
