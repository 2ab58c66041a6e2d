#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "aeroflex/analysis.hpp"

using namespace aeroflex;
using namespace aeroflex::analysis;
using coupled::ModelOptions;

namespace {

ModelOptions aircraft(double sigma, int elements = 16) {
  ModelOptions o;
  o.sigma = sigma;
  o.elements_per_semispan = elements;
  return o;
}

std::vector<beam::NodalState> dihedral_states(const beam::BeamMesh& mesh, double gamma) {
  std::vector<beam::NodalState> states(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) {
    const double y = mesh.nodes[i](1);
    const double s = std::abs(y);
    const double side = y >= 0 ? 1.0 : -1.0;
    states[i].u = Vec3(0, side * s * (std::cos(gamma) - 1), -s * std::sin(gamma));
    states[i].psi = Vec3(-side * gamma, 0, 0);
  }
  return states;
}

}  // namespace

TEST(Trim, RigidMatchesClosedForm) {
  const ModelOptions o = aircraft(1.0);
  const TrimResult r = trim_solve(o, TrimMode::rigid);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.alpha_trim, 0.130, 0.03 * 0.130);
  // Drag and the tail couple shift it only slightly from the lift-only value.
  EXPECT_NEAR(r.alpha_trim, rigid_trim_alpha(o), 1e-3);
  EXPECT_GT(r.thrust_trim, 0.0);
  EXPECT_LT(std::abs(r.residual_moment), 1e-8);
  EXPECT_FALSE(r.cl_limit_exceeded);
}

TEST(Trim, StiffWingMatchesRigid) {
  const TrimResult rigid = trim_solve(aircraft(1e-3), TrimMode::rigid);
  const TrimResult flex = trim_solve(aircraft(1e-3), TrimMode::flexible);
  ASSERT_TRUE(flex.converged);
  EXPECT_NEAR(flex.alpha_trim, rigid.alpha_trim, 1e-3);
  EXPECT_LT(flex.tip_deflection, 0.05);
}

TEST(Trim, FlexibleWingBendsUp) {
  const TrimResult r = trim_solve(aircraft(1.0), TrimMode::flexible);
  ASSERT_TRUE(r.converged);
  EXPECT_GT(r.tip_deflection, 1.0);
  EXPECT_LT(std::abs(r.residual_lift), 1e-9);
}

TEST(Trim, RequiresFullAircraft) {
  ModelOptions o = aircraft(1.0);
  o.full_aircraft = false;
  EXPECT_THROW(trim_solve(o, TrimMode::rigid), RangeError);
}

TEST(Trim, TrimmedStateIsSteady) {
  const ModelOptions o = aircraft(1e-3, 8);
  const TrimResult r = trim_solve(o, TrimMode::flexible);
  const auto model = trimmed_model(o, r);
  coupled::TimePoint start{0.0, r.state, VecX::Zero(r.state.size())};
  const auto h = coupled::simulate(model, start, 0.5, {});
  for (std::size_t i = 0; i < h.size(); ++i) {
    EXPECT_NEAR(h.root_Mx[i], h.root_Mx[0], 1e-5 * std::abs(h.root_Mx[0]));
    EXPECT_NEAR(h.pitch[i], h.pitch[0], 1e-7);
    EXPECT_NEAR(h.w[i], h.w[0], 1e-7);
  }
}

TEST(QuadraticEigenvalues, TwoDofProportionalDamping) {
  MatX M(2, 2), K(2, 2);
  M << 1, 0, 0, 2;
  K << 3, -1, -1, 1;
  const MatX C = 0.1 * K;
  const auto modes = quadratic_eigenvalues(M, C, K);
  ASSERT_EQ(modes.size(), 2u);
  const double w2[2] = {(7 - std::sqrt(33.0)) / 4, (7 + std::sqrt(33.0)) / 4};
  for (int i = 0; i < 2; ++i) {
    const double wn = std::sqrt(w2[i]);
    const double zeta = 0.05 * wn;
    EXPECT_NEAR(modes[i].lambda.real(), -zeta * wn, 1e-10);
    EXPECT_NEAR(modes[i].lambda.imag(), wn * std::sqrt(1 - zeta * zeta), 1e-10);
    EXPECT_NEAR(modes[i].damping_ratio, zeta, 1e-10);
  }
}

TEST(Linearize, VacuumCantileverMatchesModal) {
  ModelOptions o = aircraft(1.0, 8);
  o.full_aircraft = false;
  o.aerodynamics = false;
  o.gravity = false;
  const coupled::CoupledModel model(o);
  const VecX z = model.level_state(0.0, VecX::Zero(model.layout().n));
  const LinearSystem sys = linearize(model, z);
  const auto modes = eigen_modes(sys);
  const auto ref = beam::modal_frequencies(model.mesh(), o.sigma, 6);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(modes[i].lambda.real(), 0.0, 1e-5 * ref[i].omega);
    EXPECT_NEAR(modes[i].frequency, ref[i].omega, 1e-6 * ref[i].omega);
  }
}

TEST(Linearize, RejectsNonEquilibrium) {
  ModelOptions o = aircraft(1.0, 4);
  o.full_aircraft = false;
  const coupled::CoupledModel model(o);
  const VecX z = model.level_state(0.1, VecX::Zero(model.layout().n));
  EXPECT_THROW(linearize(model, z), RangeError);
  LinearizeOptions loose;
  loose.equilibrium_tolerance = -1.0;
  EXPECT_NO_THROW(linearize(model, z, loose));
}

TEST(LiftRotation, UndeformedHasNoDeficit) {
  const auto mesh = beam::BeamMesh::full_span(16.0, 8, beam::CrossSection::baseline());
  const std::vector<beam::NodalState> states(mesh.node_count());
  const std::vector<double> lifts(mesh.elements.size(), 2.0);
  const LiftRotation d = lift_rotation_diagnostics(mesh, states, lifts);
  EXPECT_NEAR(d.total, 64.0, 1e-12);
  EXPECT_NEAR(d.F_z, 64.0, 1e-12);
  EXPECT_NEAR(d.deficit, 0.0, 1e-12);
  EXPECT_NEAR(d.F_y, 0.0, 1e-12);
}

TEST(LiftRotation, UniformDihedralDeficit) {
  const auto mesh = beam::BeamMesh::full_span(16.0, 8, beam::CrossSection::baseline());
  const double gamma = 10.0 * std::numbers::pi / 180.0;
  const std::vector<double> lifts(mesh.elements.size(), 2.0);
  const LiftRotation d = lift_rotation_diagnostics(mesh, dihedral_states(mesh, gamma), lifts);
  EXPECT_NEAR(d.deficit / d.total, 1.0 - std::cos(gamma), 1e-12);
  EXPECT_NEAR(d.F_z, d.total * std::cos(gamma), 1e-10);
  EXPECT_NEAR(d.F_y, 0.0, 1e-10);
  EXPECT_NEAR(d.F_y_right, -d.F_y_left, 1e-10);
  EXPECT_LT(d.F_y_right, 0.0);
  for (double g : d.gamma) EXPECT_NEAR(g, gamma, 1e-12);
}

TEST(LiftRotation, DeficitIsQuadraticInDihedral) {
  const auto mesh = beam::BeamMesh::full_span(16.0, 8, beam::CrossSection::baseline());
  const std::vector<double> lifts(mesh.elements.size(), 1.0);
  const double d1 = lift_rotation_diagnostics(mesh, dihedral_states(mesh, 0.01), lifts).deficit;
  const double d2 = lift_rotation_diagnostics(mesh, dihedral_states(mesh, 0.02), lifts).deficit;
  EXPECT_NEAR(d2 / d1, 4.0, 1e-3);
}

TEST(LiftRotation, SizeMismatchThrows) {
  const auto mesh = beam::BeamMesh::full_span(16.0, 4, beam::CrossSection::baseline());
  const std::vector<beam::NodalState> states(mesh.node_count());
  EXPECT_THROW(lift_rotation_diagnostics(mesh, states, {1.0}), DimensionError);
}

TEST(FlightModes, RigidLimitPhugoid) {
  const ModelOptions o = aircraft(1e-3, 8);
  const TrimResult r = trim_solve(o, TrimMode::flexible);
  const auto model = trimmed_model(o, r);
  const LinearSystem sys = linearize(model, r.state);
  const FlightModes fm = classify_flight_modes(model, sys, eigen_modes(sys));
  ASSERT_TRUE(fm.phugoid.has_value());
  ASSERT_TRUE(fm.short_period.has_value());
  // Lanchester approximation sqrt(2) g / U.
  const double lanchester = std::sqrt(2.0) * kGravity / o.U;
  EXPECT_NEAR(fm.phugoid->lambda.imag(), lanchester, 0.1 * lanchester);
  EXPECT_LT(fm.phugoid->lambda.real(), 0.0);
  EXPECT_LT(fm.short_period->lambda.real(), 0.0);
}

TEST(Flutter, CoarseCantileverBenchmark) {
  ModelOptions o = flutter_options(aircraft(1.0, 8));
  FlutterOptions f;
  f.v_step = 2.0;
  const FlutterResult r = flutter_speed(o, f);
  ASSERT_TRUE(r.found);
  EXPECT_FALSE(r.unstable_at_start);
  EXPECT_NEAR(r.V_f, 31.2, 0.1 * 31.2);
  EXPECT_NEAR(r.flutter_frequency, 22.0, 4.0);
  for (std::size_t i = 1; i < r.damping_trace.size(); ++i) {
    EXPECT_GT(r.damping_trace[i].V, r.damping_trace[i - 1].V);
  }
}

TEST(Flutter, SpeedScalesWithInverseRootSigma) {
  FlutterOptions f;
  f.v_step = 4.0;
  const double v1 = flutter_speed(flutter_options(aircraft(1.0, 6)), f).V_f;
  const double v4 = flutter_speed(flutter_options(aircraft(4.0, 6)), f).V_f;
  EXPECT_NEAR(v4 / v1, 0.5, 0.01);
}

TEST(Gust, ZeroAmplitudeKeepsTrim) {
  GustOptions g;
  g.gust.w_g0 = 0.0;
  g.horizon = 0.3;
  const GustRun run = gust_response(aircraft(1e-3, 8), g);
  EXPECT_NEAR(run.peak_root_moment, std::abs(run.history.root_Mx.front()),
              1e-5 * run.peak_root_moment);
}

TEST(Gust, RejectsBadSpec) {
  GustOptions g;
  g.gust.H_g = 0.0;
  EXPECT_THROW(gust_response(aircraft(1.0, 4), g), RangeError);
  g = {};
  g.horizon = 0.0;
  EXPECT_THROW(gust_response(aircraft(1.0, 4), g), RangeError);
}

TEST(Sweep, RecordsInInputOrderWithJobs) {
  SweepOptions s;
  s.sigmas = {1.0, 1e-3, 0.5};
  s.run_flutter = false;
  s.run_gust = false;
  s.jobs = 3;
  std::vector<double> seen;
  const auto recs = sigma_sweep(aircraft(1.0, 6), s,
                                [&](const SweepRecord& r) { seen.push_back(r.sigma); });
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(seen, s.sigmas);
  for (const auto& r : recs) {
    EXPECT_TRUE(r.trim.ok) << r.trim.error;
    EXPECT_TRUE(r.modes.ok) << r.modes.error;
    EXPECT_FALSE(r.gust.ok);
  }
  EXPECT_GT(recs[0].tip_deflection_over_span, recs[1].tip_deflection_over_span);
}

TEST(Sweep, InvalidSigmaThrows) {
  SweepOptions s;
  s.sigmas = {1.0, -1.0};
  EXPECT_THROW(sigma_sweep(aircraft(1.0, 4), s), RangeError);
}
