#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aeroflex/beam.hpp"

using namespace aeroflex;
using namespace aeroflex::beam;

namespace {

const CrossSection kBase = CrossSection::baseline();

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

VecX random_state(const BeamModel& model, std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VecX eta(model.size());
  for (int i = 0; i < eta.size(); ++i) eta(i) = scale * u(rng);
  return eta;
}

}  // namespace

TEST(CrossSectionTest, BaselineStiffnessIsPositiveDefinite) {
  const Matrix6 s = kBase.stiffness_matrix();
  EXPECT_TRUE(s.isApprox(s.transpose()));
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix6>(s).eigenvalues().minCoeff(), 0.0);
  EXPECT_TRUE(kBase.S12.isZero());
}

TEST(SectionalLoads, Examples) {
  auto [f0, m0] = sectional_loads(Vec3::Zero(), Vec3::Zero(), kBase);
  EXPECT_TRUE(f0.isZero());
  EXPECT_TRUE(m0.isZero());
  auto [f1, m1] = sectional_loads(Vec3::Zero(), Vec3(0, 1e-3, 0), kBase);
  EXPECT_NEAR((m1 - Vec3(0, 20, 0)).norm(), 0.0, 1e-12);
  auto [f2, m2] = sectional_loads(Vec3::Zero(), Vec3(1e-3, 0, 0), kBase);
  EXPECT_NEAR((m2 - Vec3(10, 0, 0)).norm(), 0.0, 1e-12);
}

TEST(ScaleStiffness, Examples) {
  EXPECT_EQ(scale_stiffness(kBase, 1.0).EI2, kBase.EI2);
  const CrossSection soft = scale_stiffness(kBase, 4.0);
  EXPECT_DOUBLE_EQ(soft.EI2, 5e3);
  EXPECT_DOUBLE_EQ(soft.mu, kBase.mu);
  EXPECT_DOUBLE_EQ(soft.j_t, kBase.j_t);
  EXPECT_NEAR(scale_stiffness(kBase, 0.001).EI2, 2e7, 1e-6);
  EXPECT_THROW(scale_stiffness(kBase, 0.0), RangeError);
  EXPECT_THROW(scale_stiffness(kBase, -1.0), RangeError);
}

TEST(StrainMeasures, ReferenceConfigurationIsUnstrained) {
  const BeamMesh mesh = BeamMesh::cantilever(16.0, 3, kBase);
  auto [gamma, kappa] = strain_measures(mesh, 0, NodalState{}, NodalState{});
  EXPECT_LT(gamma.norm(), 1e-15);
  EXPECT_LT(kappa.norm(), 1e-15);
}

TEST(StrainMeasures, ObjectiveUnderRigidRotation) {
  const BeamMesh mesh = BeamMesh::cantilever(16.0, 5, kBase);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 psi = Vec3(u(rng), u(rng), u(rng)) * 2.0;
    const Mat3 r = rodrigues<double>(psi);
    const Vec3 shift(u(rng), u(rng), u(rng));
    for (int e = 0; e < mesh.element_count(); ++e) {
      NodalState a, b;
      const Vec3& xa = mesh.nodes[mesh.elements[e][0]];
      const Vec3& xb = mesh.nodes[mesh.elements[e][1]];
      a.u = r * xa + shift - xa;
      b.u = r * xb + shift - xb;
      a.psi = b.psi = psi;
      auto [gamma, kappa] = strain_measures(mesh, e, a, b);
      EXPECT_LT(gamma.norm(), 1e-13);
      EXPECT_LT(kappa.norm(), 1e-13);
    }
  }
}

TEST(StrainMeasures, CircularArcCurvature) {
  // Arc of radius 10 m bending the beam axis towards the section normal.
  const double radius = 10.0;
  for (double length : {1.0, 0.1, 0.01}) {
    const BeamMesh mesh = BeamMesh::cantilever(length, 2, kBase);
    const double phi = length / radius;
    NodalState a, b;
    const Vec3 tip(0.0, radius * std::sin(phi), -radius * (1.0 - std::cos(phi)));
    b.u = tip - mesh.nodes[1];
    b.psi = Vec3(-phi, 0.0, 0.0);
    auto [gamma, kappa] = strain_measures(mesh, 0, a, b);
    EXPECT_NEAR(kappa.norm(), 0.1, 1e-12);
    EXPECT_NEAR(std::abs(kappa(1)), 0.1, 1e-12);
    EXPECT_LT(gamma.norm(), 0.1 * phi * phi);
  }
}

TEST(StrainMeasures, RejectsOutOfRangeRotation) {
  const BeamMesh mesh = BeamMesh::cantilever(1.0, 2, kBase);
  NodalState a, b;
  b.psi = Vec3(7.0, 0, 0);
  EXPECT_THROW(strain_measures(mesh, 0, a, b), ParameterizationError);
}

TEST(Assemble, ReferenceStateHasNoGeometricStiffness) {
  const BeamMesh mesh = BeamMesh::cantilever(16.0, 11, kBase);
  const TangentSystem sys = assemble(mesh, std::vector<NodalState>(11), 1.0);
  EXPECT_LT(sys.K_g.norm(), 1e-9 * sys.K_e.norm());
  EXPECT_LT(sys.f_int.norm(), 1e-12);
  EXPECT_LT((sys.K_e - sys.K_e.transpose()).norm(), 1e-12 * sys.K_e.norm());
  EXPECT_LT((sys.M_s - sys.M_s.transpose()).norm(), 1e-12 * sys.M_s.norm());
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<MatX>(sys.M_s).eigenvalues().minCoeff(), 0.0);
}

TEST(Assemble, TangentMatchesFiniteDifferenceOfInternalForce) {
  const BeamModel model(BeamMesh::cantilever(16.0, 9, kBase), 1.0);
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const VecX eta = random_state(model, rng, 0.3);
    VecX f;
    MatX k;
    model.tangent(eta, f, k);
    EXPECT_LT((f - model.internal_force(eta)).norm(), 1e-10 * f.norm());
    MatX fd(model.size(), model.size());
    for (int j = 0; j < model.size(); ++j) {
      const double h = 1e-6;
      VecX ep = eta, em = eta;
      ep(j) += h;
      em(j) -= h;
      fd.col(j) = (model.internal_force(ep) - model.internal_force(em)) / (2 * h);
    }
    EXPECT_LT((fd - k).norm() / k.norm(), 1e-5);
  }
}

TEST(Assemble, UnconstrainedMeshIsAConstraintError) {
  BeamMesh mesh = BeamMesh::cantilever(16.0, 5, kBase);
  mesh.clamped_nodes.clear();
  EXPECT_THROW(BeamModel(mesh, 1.0), ConstraintError);
}

TEST(StaticSolve, ZeroLoadGivesZeroDeflection) {
  const BeamMesh mesh = BeamMesh::cantilever(16.0, 11, kBase);
  const StaticSolution sol = static_solve(mesh, {}, 1.0);
  EXPECT_LT(sol.eta.norm(), 1e-14);
}

TEST(StaticSolve, LinearTipDeflectionMatchesUniformLoadFormula) {
  // q c C_L with q = 27.8 Pa, c = 1 m, C_L = 0.1.
  const double w = 27.8 * 1.0 * 0.1;
  const double span = 16.0;
  const BeamMesh mesh = BeamMesh::cantilever(span, 100, kBase);
  DistributedLoad load;
  load.force = [w](const Vec3&) { return Vec3(0, 0, -w); };
  StaticOptions opts;
  opts.linear = true;
  const StaticSolution sol = static_solve(mesh, load, 1.0, opts);
  const double tip = -tip_displacement(mesh, sol.eta)(2);
  const double expected = w * std::pow(span, 3) / (8.0 * kBase.EI2);
  EXPECT_LT(relative(tip / span, expected), 0.01);
}

TEST(StaticSolve, NonlinearDeflectionBelowLinearForLargeLoad) {
  const double span = 16.0;
  const BeamMesh mesh = BeamMesh::cantilever(span, 41, kBase);
  // Load giving a linear tip deflection of 25% of the span.
  const double w = 0.25 * 8.0 * kBase.EI2 / std::pow(span, 3);
  DistributedLoad load;
  load.force = [w](const Vec3&) { return Vec3(0, 0, -w); };
  StaticOptions lin;
  lin.linear = true;
  const double d_lin = -tip_displacement(mesh, static_solve(mesh, load, 1.0, lin).eta)(2);
  const double d_nl = -tip_displacement(mesh, static_solve(mesh, load, 1.0).eta)(2);
  EXPECT_GT(d_lin / span, 0.15);
  EXPECT_LT(d_nl, d_lin);
}

TEST(StaticSolve, ResidualConverged) {
  const BeamMesh mesh = BeamMesh::cantilever(16.0, 21, kBase);
  DistributedLoad load;
  load.force = [](const Vec3&) { return Vec3(0, 0, -10.0); };
  load.moment = [](const Vec3&) { return Vec3(0, 2.0, 0); };
  const StaticSolution sol = static_solve(mesh, load, 2.0);
  const BeamModel model(mesh, 2.0);
  const VecX f = model.consistent_loads(load.force, load.moment);
  EXPECT_LT((model.internal_force(sol.eta) - f).norm(), 1e-8 * f.norm());
}

TEST(Modal, BaselineFrequencies) {
  const BeamMesh mesh = BeamMesh::cantilever(16.0, 100, kBase);
  const auto modes = modal_frequencies(mesh, 1.0, 5);
  EXPECT_LT(relative(modes[0].omega, 2.24), 0.01);
  EXPECT_EQ(modes[0].label, "out-of-plane bending 1");
  EXPECT_LT(relative(modes[2].omega, 31.04), 0.01);
  EXPECT_EQ(modes[2].label, "torsion 1");
  EXPECT_EQ(modes[3].label, "in-plane bending 1");
}

TEST(Modal, UniformStiffnessScaling) {
  const BeamMesh mesh = BeamMesh::cantilever(16.0, 30, kBase);
  const auto m1 = modal_frequencies(mesh, 1.0, 6);
  const auto m4 = modal_frequencies(mesh, 4.0, 6);
  const auto m07 = modal_frequencies(mesh, 0.7, 6);
  for (int k = 0; k < 6; ++k) {
    EXPECT_LT(relative(m4[k].omega, m1[k].omega / 2.0), 1e-8);
    EXPECT_LT(relative(m07[k].omega / m4[k].omega, std::sqrt(4.0 / 0.7)), 1e-8);
  }
}

TEST(Modal, MeshConvergence) {
  const auto coarse = modal_frequencies(BeamMesh::cantilever(16.0, 50, kBase), 1.0, 3);
  const auto fine = modal_frequencies(BeamMesh::cantilever(16.0, 100, kBase), 1.0, 3);
  for (int k = 0; k < 3; ++k) EXPECT_LT(relative(coarse[k].omega, fine[k].omega), 1e-3);
}

TEST(Modal, BendingRotaryInertiaHasLittleEffect) {
  CrossSection no_rotary = kBase;
  no_rotary.J_rho(1, 1) = no_rotary.J_rho(2, 2) = kBase.j_t / 1e4;
  const auto with = modal_frequencies(BeamMesh::cantilever(16.0, 40, kBase), 1.0, 5);
  const auto without = modal_frequencies(BeamMesh::cantilever(16.0, 40, no_rotary), 1.0, 5);
  for (int k = 0; k < 5; ++k) EXPECT_LT(relative(with[k].omega, without[k].omega), 1e-3);
}

TEST(Modal, TooManyModesRejected) {
  EXPECT_THROW(modal_frequencies(BeamMesh::cantilever(16.0, 3, kBase), 1.0, 13), RangeError);
}

TEST(GeometricStiffness, UpwardBentEquilibriumStiffensFirstBending) {
  const BeamMesh mesh = BeamMesh::cantilever(16.0, 33, kBase);
  const double w = 0.2 * 8.0 * kBase.EI2 / std::pow(16.0, 3);
  DistributedLoad load;
  load.force = [w](const Vec3&) { return Vec3(0, 0, -w); };
  const StaticSolution sol = static_solve(mesh, load, 1.0);
  const BeamModel model(mesh, 1.0);
  VecX f;
  MatX k_tan;
  model.tangent(sol.eta, f, k_tan);
  const double lambda_e = Eigen::GeneralizedSelfAdjointEigenSolver<MatX>(
                              model.elastic_stiffness(), model.mass_matrix())
                              .eigenvalues()(0);
  const double lambda_t =
      Eigen::GeneralizedSelfAdjointEigenSolver<MatX>(k_tan, model.mass_matrix())
          .eigenvalues()(0);
  EXPECT_GT(lambda_t, lambda_e);
}
