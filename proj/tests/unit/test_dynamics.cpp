#include <gtest/gtest.h>

#include <cmath>

#include "qmon/dynamics.hpp"
#include "qmon/error.hpp"
#include "support.hpp"

namespace qmon {
namespace {

using test::Rng;

ModelParams larmor_only(double omega_r = 50.0) { return ModelParams::leaky_cavity(0.0, 0.0, 0.8, omega_r); }
ModelParams reference_params() { return ModelParams::leaky_cavity(10.0, 1.0, 0.8, 50.0, 0.1); }

TEST(ModelParams, Validation) {
  EXPECT_NO_THROW(reference_params().validate());
  ModelParams p = reference_params();
  p.efficiency = 1.2;
  EXPECT_THROW(p.validate(), ConfigError);
  p = reference_params();
  p.gamma = -1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = reference_params();
  p.sigma_z2 = -0.1;
  EXPECT_THROW(p.validate(), ConfigError);
  p = reference_params();
  p.h_control = sigma_minus();
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(NoiseSpec, Validation) {
  NoiseSpec n;
  EXPECT_EQ(n.steps(), 1000u);
  n.horizon = 0.0015;
  EXPECT_THROW(n.validate(), ConfigError);
  n.horizon = 1.0;
  n.dt = 0.0;
  EXPECT_THROW(n.validate(), ConfigError);
  n.dt = 1e-3;
  n.substeps = 0;
  EXPECT_THROW(n.validate(), ConfigError);
}

TEST(DriftF, SpecExamples) {
  EXPECT_LT((drift_f({1, 0, 0}, 0.0, larmor_only()) - Vec3(0, 50, 0)).norm(), 1e-12);
  EXPECT_LT(drift_f({0, 0, 1}, 0.0, larmor_only()).norm(), 1e-12);
  EXPECT_LT(drift_f({0, 0, 1}, 0.0, reference_params()).norm(), 1e-12);
}

TEST(DriftF, MatchesMatrixFormSme) {
  Rng rng(21);
  for (int i = 0; i < 500; ++i) {
    const ModelParams p = test::random_params(rng);
    const Vec3 x = test::random_ball(rng);
    const double w = test::uniform(rng, -50.0, 50.0);
    const Vec3 oracle = test::bloch_of(test::sme_drift_matrix(test::rho_matrix(x), w, p));
    EXPECT_LT((drift_f(x, w, p) - oracle).norm(), 1e-10 * (1.0 + oracle.norm()));
    const QubitModel m(p);
    EXPECT_LT((m.drift(x, w) - oracle).norm(), 1e-10 * (1.0 + oracle.norm()));
  }
}

TEST(DriftF, AffineInStateAndControl) {
  Rng rng(22);
  const ModelParams p = test::random_params(rng);
  const Vec3 x = test::random_ball(rng), y = test::random_ball(rng);
  const double a = 0.3;
  EXPECT_LT((drift_f(a * x + (1 - a) * y, 5.0, p) - (a * drift_f(x, 5.0, p) + (1 - a) * drift_f(y, 5.0, p))).norm(),
            1e-10);
  EXPECT_LT((drift_f(x, 3.0, p) - 0.5 * (drift_f(x, 2.0, p) + drift_f(x, 4.0, p))).norm(), 1e-10);
}

TEST(DiffusionG, SpecExamples) {
  const ModelParams p = reference_params();
  EXPECT_LT((diffusion_g({0, 0, 0}, p) - Vec3(std::sqrt(0.8), 0, 0)).norm(), 1e-12);
  EXPECT_LT(diffusion_g({0, 0, 1}, p).norm(), 1e-12);
  ModelParams blind = p;
  blind.efficiency = 0.0;
  Rng rng(23);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(diffusion_g(test::random_ball(rng), blind).norm(), 0.0);
}

TEST(DiffusionG, MatchesBackactionOracleAndCoefficients) {
  Rng rng(24);
  for (int i = 0; i < 500; ++i) {
    const ModelParams p = test::random_params(rng);
    const Vec3 x = test::random_ball(rng);
    const CMat2 rho = test::rho_matrix(x);
    const CMat2& c = p.c_meas;
    const CMat2 back = c * rho + rho * c.adjoint() - (c + c.adjoint()).cwiseProduct(rho.transpose()).sum() * rho;
    const Vec3 oracle = std::sqrt(p.efficiency * p.measurement_strength) * test::bloch_of(back);
    EXPECT_LT((diffusion_g(x, p) - oracle).norm(), 1e-12);
    EXPECT_LT((QubitModel(p).diffusion(x) - oracle).norm(), 1e-12);
  }
}

TEST(OutputH, SpecExamplesAndLinearity) {
  const ModelParams p = reference_params();
  EXPECT_NEAR(output_h({1, 0, 0}, p), std::sqrt(0.8), 1e-12);
  EXPECT_NEAR(output_h({0, 0, 0}, p), 0.0, 1e-15);
  EXPECT_LT((output_matrix_C(p) - Vec3(std::sqrt(0.8), 0, 0)).norm(), 1e-15);
  Rng rng(25);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = test::random_ball(rng);
    EXPECT_NEAR(output_h(x, p) - output_h(Vec3::Zero(), p), output_matrix_C(p).dot(x), 1e-12);
  }
}

TEST(DiffusionJacobian, MatchesFiniteDifferences) {
  Rng rng(26);
  for (int i = 0; i < 100; ++i) {
    const QubitModel m(test::random_params(rng));
    const Vec3 x = 0.9 * test::random_ball(rng);
    const Mat3 j = m.diffusion_jacobian(x);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      const Vec3 e = Vec3::Unit(k) * h;
      const Vec3 fd = (m.diffusion(x + e) - m.diffusion(x - e)) / (2 * h);
      EXPECT_LT((j.col(k) - fd).norm(), 1e-7 * (1.0 + j.norm()));
    }
  }
}

TEST(EmStep, SpecExamples) {
  const double dt = 1e-3;
  const StepResult r = em_step({1, 0, 0}, 0.0, 0.0, larmor_only(), dt);
  EXPECT_TRUE(r.clamped);
  EXPECT_LT((r.x - Vec3(1, 50 * dt, 0).normalized()).norm(), 1e-14);

  const ModelParams p = reference_params();
  for (double dw : {-0.1, 0.0, 0.05}) {
    EXPECT_LT((em_step({0, 0, 1}, 0.0, dw, p, dt).x - Vec3(0, 0, 1)).norm(), 1e-14);
  }
}

TEST(EmStep, BlindDetectorIsEulerStep) {
  ModelParams p = reference_params();
  p.efficiency = 0.0;
  const Vec3 x(0.1, 0.5, -0.2);
  const StepResult r = em_step(x, 7.0, 0.3, p, 1e-3);
  EXPECT_LT((r.x - (x + drift_f(x, 7.0, p) * 1e-3)).norm(), 1e-15);
}

TEST(SimulateTrajectory, RecordLayoutAndMeasurementIdentity) {
  NoiseSpec n;
  n.seed = 3;
  n.horizon = 0.2;
  const ModelParams p = reference_params();
  ConstantControl drive(30.0);
  const TrajectoryRecord rec = simulate_trajectory(p, n, {0, 1, 0}, &drive, 4);
  ASSERT_EQ(rec.t.size(), 201u);
  ASSERT_EQ(rec.x.size(), 201u);
  ASSERT_EQ(rec.omega.size(), 201u);
  ASSERT_EQ(rec.dy.size(), 200u);
  const QubitModel m(p);
  for (std::size_t i = 0; i < rec.dy.size(); ++i) {
    EXPECT_NEAR(rec.t[i + 1] - rec.t[i], n.dt, 1e-15);
    EXPECT_LE(rec.x[i].norm(), 1.0 + 1e-15);
    EXPECT_NEAR(rec.dy[i], m.output(rec.x[i]) * n.dt + rec.dw[i] + rec.dz[i], 1e-15);
    EXPECT_EQ(rec.omega[i], 30.0);
  }
  // Replaying the stored Wiener increments reproduces the state path.
  Vec3 x = rec.x[0];
  for (std::size_t i = 0; i < rec.dy.size(); ++i) {
    x = em_step(x, 30.0, rec.dw[i], m, n.dt).x;
    EXPECT_EQ(x, rec.x[i + 1]);
  }
}

TEST(SimulateTrajectory, BitIdenticalForSameSeed) {
  NoiseSpec n;
  n.seed = 99;
  n.substeps = 4;
  const TrajectoryRecord a = simulate_trajectory(reference_params(), n, {0, 1, 0}, nullptr, 2);
  const TrajectoryRecord b = simulate_trajectory(reference_params(), n, {0, 1, 0}, nullptr, 2);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.dy, b.dy);
  const TrajectoryRecord c = simulate_trajectory(reference_params(), n, {0, 1, 0}, nullptr, 3);
  EXPECT_NE(a.dy, c.dy);
}

TEST(SimulateTrajectory, NoiseFreeMatchesLindbladWithinEulerError) {
  ModelParams p = reference_params();
  p.efficiency = 0.0;
  p.sigma_z2 = 0.0;
  const auto ref = lindblad_reference(p, 30.0, {0, 1, 0}, 1e-4, 1.0);
  auto max_err = [&](double dt) {
    NoiseSpec n;
    n.dt = dt;
    ConstantControl drive(30.0);
    const TrajectoryRecord rec = simulate_trajectory(p, n, {0, 1, 0}, &drive);
    const std::size_t stride = static_cast<std::size_t>(std::llround(dt / 1e-4));
    double err = 0.0;
    for (std::size_t i = 0; i < rec.x.size(); ++i) err = std::max(err, (rec.x[i] - ref.x[i * stride]).norm());
    return err;
  };
  const double e1 = max_err(1e-3), e2 = max_err(5e-4);
  EXPECT_LT(e1, 0.25);
  EXPECT_GT(e1 / e2, 1.7);
  EXPECT_LT(e1 / e2, 2.3);
}

class NanPolicy final : public ControlPolicy {
 public:
  double control(std::size_t step, double, const CoherenceVector&) override { return step == 5 ? std::nan("") : 1.0; }
};

TEST(SimulateTrajectory, NonFiniteControlAborts) {
  NanPolicy bad;
  EXPECT_THROW(simulate_trajectory(reference_params(), NoiseSpec{}, {0, 1, 0}, &bad), NumericalError);
}

TEST(SimulateTrajectory, ProjectionIsRareAtReferenceSettings) {
  NoiseSpec n;
  n.seed = 8;
  std::size_t clamps = 0, steps = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    ConstantControl drive(30.0);
    const TrajectoryRecord rec = simulate_trajectory(reference_params(), n, {0, 1, 0}, &drive, k);
    clamps += rec.projection_count;
    steps += rec.substep_count;
  }
  EXPECT_LT(static_cast<double>(clamps), 0.01 * static_cast<double>(steps));
}

TEST(LindbladReference, UnitaryCaseIsRodriguesRotation) {
  const ModelParams p = larmor_only();
  const double omega = 30.0;
  // H = (w_r/2) s3 - W s1 = b.s / 2 with b = (-2W, 0, w_r).
  const Vec3 b(-2.0 * omega, 0.0, 50.0);
  const Vec3 x0(0, 1, 0);
  const auto ref = lindblad_reference(p, omega, x0, 1e-4, 1.0);
  for (std::size_t i = 0; i < ref.x.size(); i += 500) {
    EXPECT_NEAR(ref.x[i].norm(), 1.0, 1e-8);
    EXPECT_LT((ref.x[i] - test::rodrigues(x0, b, ref.t[i])).norm(), 1e-7);
  }
}

TEST(LindbladReference, UndrivenDecayToGround) {
  const auto ref = lindblad_reference(reference_params(), 0.0, {0, 1, 0}, 1e-3, 1.0);
  EXPECT_GT(ref.x.back()(2), 0.999);
  for (std::size_t i = 1; i < ref.x.size(); ++i) EXPECT_GE(ref.x[i](2), ref.x[i - 1](2) - 1e-15);
}

TEST(LindbladReference, RefinementConverges) {
  const auto a = lindblad_reference(reference_params(), 30.0, {0, 1, 0}, 1e-3, 1.0);
  const auto b = lindblad_reference(reference_params(), 30.0, {0, 1, 0}, 5e-4, 1.0);
  EXPECT_LT((a.x.back() - b.x.back()).norm(), 1e-6);
}

TEST(LindbladReference, SignalOverloadSamplesStepStart) {
  const ModelParams p = reference_params();
  const auto c = lindblad_reference(p, 12.0, {0, 1, 0}, 1e-3, 0.1);
  const auto s = lindblad_reference(p, [](double) { return 12.0; }, {0, 1, 0}, 1e-3, 0.1);
  EXPECT_EQ(c.x, s.x);
  // A step in the signal takes effect from the first step at or after it.
  const auto late = lindblad_reference(p, [](double t) { return t < 0.05 - 1e-12 ? 0.0 : 12.0; }, {0, 1, 0}, 1e-3, 0.1);
  const auto off = lindblad_reference(p, 0.0, {0, 1, 0}, 1e-3, 0.1);
  EXPECT_EQ(late.x[50], off.x[50]);
  EXPECT_NE(late.x[51], off.x[51]);
}

TEST(ModelParams, DriftScalingMultipliesHamiltonian) {
  const ModelParams p = reference_params().with_drift_scaled(1.2);
  EXPECT_DOUBLE_EQ(p.omega_r, 60.0);
  EXPECT_LT((p.h_drift - 30.0 * pauli(3)).cwiseAbs().maxCoeff(), 1e-14);
}

}  // namespace
}  // namespace qmon
