#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Geometry>

#include "aeroflex/aero.hpp"

using namespace aeroflex;
using namespace aeroflex::aero;

namespace {

constexpr double kRho = 0.0889;

double deg(double rad) { return rad * 180.0 / kPi; }

// Classical RK4 integration of the four lag states under constant forcing.
AeroStripState integrate_lags(double w34, double w_gust, double U, double b,
                              double t_end, double dt) {
  AeroStripState s;
  auto rates = [&](const Vec4& x) {
    AeroStripState tmp{x(0), x(1), x(2), x(3), 0.0};
    return aero_state_rates(tmp, w34, w_gust, U, b);
  };
  Vec4 x = Vec4::Zero();
  for (double t = 0.0; t < t_end - 1e-12; t += dt) {
    const Vec4 k1 = rates(x);
    const Vec4 k2 = rates(x + 0.5 * dt * k1);
    const Vec4 k3 = rates(x + 0.5 * dt * k2);
    const Vec4 k4 = rates(x + dt * k3);
    x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  s.x1 = x(0);
  s.x2 = x(1);
  s.xg1 = x(2);
  s.xg2 = x(3);
  return s;
}

}  // namespace

TEST(AeroConstantsTest, CoefficientSums) {
  const AeroConstants k;
  EXPECT_NEAR(k.psi1 + k.psi2, 0.5, 1e-15);
  EXPECT_NEAR(k.phi1 + k.phi2, 1.0, 1e-15);
}

TEST(Wagner, Values) {
  EXPECT_NEAR(wagner_phi(0.0), 0.5, 1e-15);
  EXPECT_NEAR(wagner_phi(1e4), 1.0, 1e-12);
  EXPECT_NEAR(wagner_phi(10.0), 0.8786, 1e-4);
  EXPECT_THROW(wagner_phi(-1.0), RangeError);
  for (double t = 0.0; t < 100.0; t += 0.5) EXPECT_LE(wagner_phi(t), wagner_phi(t + 0.5));
}

TEST(Kussner, Values) {
  EXPECT_NEAR(kussner_psi(0.0), 0.0, 1e-15);
  EXPECT_NEAR(kussner_psi(1e4), 1.0, 1e-12);
  EXPECT_NEAR(kussner_psi(1.0), 1 - 0.5792 * std::exp(-0.1393) - 0.4208 * std::exp(-1.802),
              1e-15);
  EXPECT_NEAR(kussner_psi(1.0), 0.4267, 1e-4);
  EXPECT_THROW(kussner_psi(-0.1), RangeError);
}

TEST(Theodorsen, Limits) {
  EXPECT_NEAR(std::abs(theodorsen_jones(0.0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(theodorsen_jones(1e8) - 0.5), 0.0, 1e-8);
}

TEST(Theodorsen, MatchesLagStateTransferFunction) {
  // Two-state lag system in nondimensional time, x' = A x + B w,
  // Q = C x + D w, evaluated at s = i k.
  const AeroConstants c;
  for (double k : {0.01, 0.1, 0.5, 2.0}) {
    Eigen::Matrix2cd A = Eigen::Matrix2cd::Zero();
    A(0, 0) = -c.eps1;
    A(1, 1) = -c.eps2;
    const Eigen::Vector2cd B(1.0, 1.0);
    const Eigen::RowVector2cd C(c.eps1 * c.psi1, c.eps2 * c.psi2);
    const std::complex<double> s(0.0, k);
    const Eigen::Matrix2cd sI_A = s * Eigen::Matrix2cd::Identity() - A;
    const std::complex<double> h = (C * sI_A.inverse() * B)(0) + (1.0 - c.psi1 - c.psi2);
    const auto theo = theodorsen_jones(k);
    EXPECT_NEAR(std::abs(theo), std::abs(h), 1e-10);
    EXPECT_NEAR(std::arg(theo), std::arg(h), 1e-10);
  }
}

TEST(EffectiveVelocity, Examples) {
  const StripGeometry strip;
  const Vec3 v_inf(25, 0, 0);
  EXPECT_TRUE(effective_velocity(strip, v_inf, Mat3::Identity(), Vec3::Zero(), Vec3::Zero())
                  .isApprox(Vec3(25, 0, 0)));
  const Vec3 plunge =
      effective_velocity(strip, v_inf, Mat3::Identity(), Vec3::Zero(), Vec3(0, 0, -1));
  EXPECT_NEAR(plunge(2), 1.0, 1e-15);
  // Pitch rate about axis 2 at a station 8 m ahead of the reference point.
  const Vec3 omega(0, 0.1, 0);
  const Vec3 r(8, 0, 0);
  const Vec3 v_body = omega.cross(r);
  const Vec3 v = effective_velocity(strip, v_inf, Mat3::Identity(), v_body, Vec3::Zero());
  EXPECT_NEAR((v - Vec3(25, 0, 0.8)).norm(), 0.0, 1e-14);
}

TEST(EffectiveVelocity, RotatedStripFrame) {
  StripGeometry strip;
  strip.R_c = Eigen::AngleAxisd(0.3, Vec3::UnitY()).toRotationMatrix();
  const Vec3 v = effective_velocity(strip, Vec3(25, 0, 0), Mat3::Identity(), Vec3::Zero(),
                                    Vec3::Zero());
  EXPECT_NEAR(v.norm(), 25.0, 1e-12);
  EXPECT_NEAR(std::abs(effective_aoa(v)), 0.3, 1e-12);
}

TEST(EffectiveAoa, Examples) {
  EXPECT_NEAR(effective_aoa(Vec3(25, 0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(deg(effective_aoa(Vec3(25, 0, 25 * std::tan(2.0 * kPi / 180)))), 2.0, 1e-12);
  EXPECT_NEAR(deg(effective_aoa(Vec3(25, 0, -2.5))), -5.7106, 1e-4);
  EXPECT_THROW(effective_aoa(Vec3(0, 3, 1)), DegenerateFlowError);
}

TEST(AeroStateRates, Examples) {
  const AeroConstants k;
  EXPECT_TRUE(aero_state_rates({}, 0.0, 0.0, 25.0, 0.5).isZero());
  const double w = 2.5, U = 25.0, b = 0.5;
  AeroStripState eq;
  eq.x1 = w * b / (k.eps1 * U);
  eq.x2 = w * b / (k.eps2 * U);
  const Vec4 rates = aero_state_rates(eq, w, 0.0, U, b);
  EXPECT_NEAR(rates(0), 0.0, 1e-13);
  EXPECT_NEAR(rates(1), 0.0, 1e-13);
  StripKinematics kin;
  kin.U = U;
  kin.alpha = w / U;
  StripGeometry strip;
  const StripLoads loads = strip_loads(strip, kin, eq, k, kRho);
  EXPECT_NEAR(loads.L, 2 * kPi * kRho * U * b * w, 1e-12);
  EXPECT_THROW(aero_state_rates({}, 0, 0, 0.0, 0.5), RangeError);
}

TEST(StripLoadsTest, SteadyLiftClassicalValue) {
  const AeroConstants k;
  const double U = 25.0, b = 0.5, alpha = 0.1;
  AeroStripState eq;
  eq.x1 = U * alpha * b / (k.eps1 * U);
  eq.x2 = U * alpha * b / (k.eps2 * U);
  StripKinematics kin;
  kin.U = U;
  kin.alpha = alpha;
  const StripLoads loads = strip_loads(StripGeometry{}, kin, eq, k, kRho);
  EXPECT_NEAR(loads.L, 17.45, 0.01);
  EXPECT_NEAR(loads.cl, 2 * kPi * 0.1, 1e-12);
  EXPECT_NEAR(loads.M, loads.L * b / 2, 1e-12);
}

TEST(StripLoadsTest, ZeroLiftDrag) {
  StripKinematics kin;
  kin.U = 25.0;
  const StripLoads loads = strip_loads(StripGeometry{}, kin, {}, AeroConstants{}, kRho);
  EXPECT_EQ(loads.L, 0.0);
  EXPECT_EQ(loads.M, 0.0);
  EXPECT_NEAR(loads.D, 0.2778, 1e-4);
}

TEST(StripLoadsTest, InducedDragQuadraticInLift) {
  const AeroConstants k;
  StripKinematics kin;
  kin.U = 25.0;
  const double d0 = strip_loads(StripGeometry{}, kin, {}, k, kRho).D;
  double ratio = 0.0;
  for (double alpha : {0.02, 0.05, 0.1, -0.1}) {
    kin.alpha = alpha;
    const StripLoads l = strip_loads(StripGeometry{}, kin, {}, k, kRho);
    EXPECT_GE(l.D, 0.0);
    const double r = (l.D - d0) / (l.cl * l.cl);
    if (ratio != 0.0) EXPECT_NEAR(r, ratio, 1e-12 * ratio);
    ratio = r;
  }
}

TEST(StripLoadsTest, NonCirculatoryTerms) {
  StripGeometry strip;
  strip.a = -0.2;
  StripKinematics kin;
  kin.h_ddot = 1.0;
  const StripLoads l = strip_loads(strip, kin, {}, AeroConstants{}, kRho);
  EXPECT_NEAR(l.L, kPi * kRho * 0.25, 1e-15);
  EXPECT_NEAR(l.M, kPi * kRho * 0.25 * (-0.5 * -0.2), 1e-15);
}

TEST(LagStates, StepResponseReproducesWagner) {
  const double U = 25.0, b = 0.5, dt = 1e-3;
  const AeroConstants k;
  StripKinematics kin;
  kin.U = U;
  kin.alpha = 1.0 / U;  // unit downwash step
  AeroStripState s;
  for (double tau : {0.5, 2.0, 10.0, 50.0, 200.0}) {
    s = integrate_lags(1.0, 0.0, U, b, tau * b / U, dt);
    const double lc = strip_loads(StripGeometry{}, kin, s, k, kRho).L;
    const double q = lc / (2 * kPi * kRho * U * b);
    EXPECT_NEAR(q, wagner_phi(tau), 1e-4) << "tau " << tau;
  }
  s = integrate_lags(1.0, 0.0, U, b, 400 * b / U, dt);
  EXPECT_NEAR(strip_loads(StripGeometry{}, kin, s, k, kRho).L / (2 * kPi * kRho * U * b), 1.0,
              1e-3);
}

TEST(LagStates, GustStepResponseReproducesKussner) {
  const double U = 25.0, b = 0.5, dt = 1e-3;
  StripKinematics kin;
  kin.U = U;
  for (double tau : {0.5, 1.0, 5.0, 30.0}) {
    const AeroStripState s = integrate_lags(0.0, 1.0, U, b, tau * b / U, dt);
    const double q = strip_loads(StripGeometry{}, kin, s, AeroConstants{}, kRho).L /
                     (2 * kPi * kRho * U * b);
    EXPECT_NEAR(q, kussner_psi(tau), 1e-4) << "tau " << tau;
  }
}

TEST(Gust, OneMinusCosine) {
  const GustSpec g{5.0, 25.0, 1.0};
  EXPECT_EQ(gust_velocity(0.5, g, 25.0), 0.0);
  EXPECT_NEAR(gust_velocity(1.5, g, 25.0), 5.0, 1e-12);
  EXPECT_NEAR(gust_velocity(2.0, g, 25.0), 0.0, 1e-12);
  EXPECT_EQ(gust_velocity(2.5, g, 25.0), 0.0);
  EXPECT_THROW((GustSpec{5.0, 0.0, 0.0}.validate()), RangeError);
  EXPECT_THROW((GustSpec{-1.0, 25.0, 0.0}.validate()), RangeError);
}
