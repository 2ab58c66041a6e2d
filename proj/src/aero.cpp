#include "aeroflex/aero.hpp"

#include <cmath>
#include <string>

namespace aeroflex::aero {

namespace {

void require_nonnegative_time(double tau) {
  if (!(tau >= 0.0)) {
    throw RangeError("nondimensional time must be >= 0, got " + std::to_string(tau));
  }
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0)) {
    throw RangeError(std::string(name) + " must be > 0, got " + std::to_string(value));
  }
}

}  // namespace

void GustSpec::validate() const {
  if (!(H_g > 0.0)) throw RangeError("gust.H_g must be > 0");
  if (!(w_g0 >= 0.0)) throw RangeError("gust.w_g0 must be >= 0");
}

double wagner_phi(double tau, const AeroConstants& k) {
  require_nonnegative_time(tau);
  return 1.0 - k.psi1 * std::exp(-k.eps1 * tau) - k.psi2 * std::exp(-k.eps2 * tau);
}

double kussner_psi(double tau, const AeroConstants& k) {
  require_nonnegative_time(tau);
  return 1.0 - k.phi1 * std::exp(-k.beta1 * tau) - k.phi2 * std::exp(-k.beta2 * tau);
}

std::complex<double> theodorsen_jones(double k, const AeroConstants& c) {
  if (k < 0.0) throw RangeError("reduced frequency must be >= 0");
  const std::complex<double> ik(0.0, k);
  return 1.0 - c.psi1 * ik / (ik + c.eps1) - c.psi2 * ik / (ik + c.eps2);
}

Vec3 effective_velocity(const StripGeometry& strip, const Vec3& V_inf,
                        const Mat3& R_zeta, const Vec3& v_body,
                        const Vec3& u_dot) {
  return strip.R_c.transpose() * (R_zeta.transpose() * V_inf - v_body - u_dot);
}

double effective_aoa(const Vec3& V_eff) {
  if (std::abs(V_eff(0)) <= 1e-12 * std::max(1.0, V_eff.norm())) {
    throw DegenerateFlowError("chordwise velocity vanishes at strip");
  }
  return std::atan2(V_eff(2), V_eff(0));
}

double downwash_34(const StripGeometry& strip, const StripKinematics& kin) {
  return kin.h_dot + kin.U * kin.alpha + strip.b * (0.5 - strip.a) * kin.alpha_dot;
}

Vec4 aero_state_rates(const AeroStripState& state, double w34, double w_gust,
                      double U, double b, const AeroConstants& k) {
  require_positive(U, "U");
  require_positive(b, "b");
  const double r = U / b;
  return Vec4(-k.eps1 * r * state.x1 + w34, -k.eps2 * r * state.x2 + w34,
              -k.beta1 * r * state.xg1 + w_gust, -k.beta2 * r * state.xg2 + w_gust);
}

StripLoads strip_loads(const StripGeometry& strip, const StripKinematics& kin,
                       const AeroStripState& state, const AeroConstants& k,
                       double rho) {
  require_positive(kin.U, "U");
  const double U = kin.U;
  const double b = strip.b;
  const double a = strip.a;
  const double r = U / b;
  const double w34 = downwash_34(strip, kin);
  const double lag = (1.0 - k.psi1 - k.psi2) * w34 + k.eps1 * k.psi1 * r * state.x1 +
                     k.eps2 * k.psi2 * r * state.x2;
  // Kussner realization; the direct term vanishes since phi1 + phi2 = 1.
  const double gust = k.phi1 * k.beta1 * r * state.xg1 + k.phi2 * k.beta2 * r * state.xg2;
  const double circulation = lag + gust;
  const double scale = k.cl_alpha / (2.0 * kPi);

  StripLoads out;
  const double l_nc = kPi * rho * b * b * (kin.h_ddot + U * kin.alpha_dot - b * a * kin.alpha_ddot);
  const double l_c = scale * 2.0 * kPi * rho * U * b * circulation;
  out.L = l_nc + l_c;
  out.M = kPi * rho * b * b *
              (-b * a * kin.h_ddot - U * b * (0.5 - a) * kin.alpha_dot -
               b * b * (0.125 + a * a) * kin.alpha_ddot) +
          (a + 0.5) * b * l_c;
  const double V = kin.V > 0.0 ? kin.V : U;
  const double q_dyn = 0.5 * rho * V * V * strip.c;
  out.cl = out.L / q_dyn;
  out.D = q_dyn * (k.cd0 + out.cl * out.cl / (kPi * k.e0 * k.aspect_ratio));
  return out;
}

double gust_velocity(double t, const GustSpec& spec, double U) {
  require_positive(U, "U");
  const double duration = spec.H_g / U;
  if (t < spec.t0 || t > spec.t0 + duration) return 0.0;
  return 0.5 * spec.w_g0 * (1.0 - std::cos(2.0 * kPi * U * (t - spec.t0) / spec.H_g));
}

}  // namespace aeroflex::aero
