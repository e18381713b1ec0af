#include <gtest/gtest.h>

#include <stdexcept>

#include "qmon/error.hpp"
#include "qmon/qcore.hpp"
#include "support.hpp"

namespace qmon {
namespace {

using test::Rng;
const Complex kI{0.0, 1.0};

double max_abs(const CMat2& m) { return m.cwiseAbs().maxCoeff(); }

TEST(Pauli, MatchesStandardMatrices) {
  CMat2 s1, s2, s3;
  s1 << 0, 1, 1, 0;
  s2 << 0, -kI, kI, 0;
  s3 << 1, 0, 0, -1;
  EXPECT_EQ(pauli(1), s1);
  EXPECT_EQ(pauli(2), s2);
  EXPECT_EQ(pauli(3), s3);
  EXPECT_THROW(pauli(0), std::out_of_range);
  EXPECT_THROW(pauli(4), std::out_of_range);
}

TEST(Pauli, LoweringOperatorTakesExcitedToGround) {
  const Eigen::Vector2cd e(0, 1);
  const Eigen::Vector2cd g = sigma_minus() * e;
  EXPECT_EQ(g, Eigen::Vector2cd(1, 0));
  EXPECT_EQ(sigma_plus(), dagger(sigma_minus()));
}

TEST(TraceInner, PauliOrthogonality) {
  EXPECT_EQ(trace_inner(pauli(1), pauli(1)), Complex(2.0));
  EXPECT_EQ(trace_inner(pauli(1), pauli(2)), Complex(0.0));
  EXPECT_EQ(trace_inner(pauli(3), 0.5 * identity2()), Complex(0.0));
}

TEST(Coherence, SpecExamples) {
  EXPECT_LT(to_coherence(DensityMatrix::maximally_mixed()).norm(), 1e-15);
  CMat2 plus_y;
  plus_y << 0.5, -0.5 * kI, 0.5 * kI, 0.5;
  EXPECT_LT((to_coherence(DensityMatrix::from_matrix(plus_y)) - Vec3(0, 1, 0)).norm(), 1e-15);
  EXPECT_LT((to_coherence(DensityMatrix::ground()) - Vec3(0, 0, 1)).norm(), 1e-15);
  EXPECT_LT(max_abs(from_coherence(Vec3(0, 1, 0)).matrix() - plus_y), 1e-15);
  EXPECT_LT(max_abs(from_coherence(Vec3::Zero()).matrix() - 0.5 * identity2()), 1e-15);
}

TEST(Coherence, RejectsOutsideBall) {
  EXPECT_THROW(from_coherence(Vec3(0, 0, 1.0 + 1e-6)), Error);
  EXPECT_NO_THROW(from_coherence(Vec3(0, 0, 1.0 + 1e-10)));
  CMat2 bad;
  bad << 0.5, 1.0, 0.0, 0.5;
  EXPECT_THROW(to_coherence(bad), Error);
  EXPECT_THROW(DensityMatrix::from_matrix(bad), Error);
  CMat2 negative;
  negative << 1.5, 0, 0, -0.5;
  EXPECT_THROW(DensityMatrix::from_matrix(negative), Error);
}

TEST(Coherence, RoundTripBothWays) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 x = test::random_ball(rng);
    const DensityMatrix rho = from_coherence(x);
    EXPECT_LT((to_coherence(rho) - x).norm(), 1e-12);
    EXPECT_LT(max_abs(from_coherence(to_coherence(rho)).matrix() - rho.matrix()), 1e-12);
    EXPECT_LT(max_abs(rho.matrix() - test::rho_matrix(x)), 1e-15);
  }
}

TEST(Coherence, EigenvaluesAreHalfOnePlusMinusNorm) {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const Vec3 x = test::random_ball(rng);
    Eigen::SelfAdjointEigenSolver<CMat2> es(from_coherence(x).matrix());
    EXPECT_NEAR(es.eigenvalues()(0), 0.5 * (1.0 - x.norm()), 1e-12);
    EXPECT_NEAR(es.eigenvalues()(1), 0.5 * (1.0 + x.norm()), 1e-12);
  }
}

TEST(Dissipator, SpecExamples) {
  EXPECT_LT(max_abs(dissipator(sigma_minus(), DensityMatrix::excited()) - pauli(3)), 1e-15);
  EXPECT_LT(max_abs(dissipator(CMat2::Zero(), DensityMatrix::excited())), 1e-15);
  EXPECT_LT(max_abs(dissipator(sigma_minus(), DensityMatrix::ground())), 1e-15);
}

TEST(MeasSuperop, SpecExamples) {
  EXPECT_LT(max_abs(meas_superop(sigma_minus(), DensityMatrix::maximally_mixed()) - 0.5 * pauli(1)), 1e-15);
  EXPECT_LT(max_abs(meas_superop(sigma_minus(), DensityMatrix::ground())), 1e-15);
}

TEST(Superoperators, TracelessAndHermitianPreserving) {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const CMat2 c = test::random_cmat(rng, 2.0);
    const DensityMatrix rho = test::random_density(rng);
    const CMat2 d = dissipator(c, rho);
    const CMat2 h = meas_superop(c, rho);
    EXPECT_LT(std::abs(d.trace()), 1e-12);
    EXPECT_LT(std::abs(h.trace()), 1e-12);
    EXPECT_LT(hermiticity_residual(d), 1e-12);
    EXPECT_LT(hermiticity_residual(h), 1e-12);
  }
}

TEST(Projection, SpecExamples) {
  EXPECT_EQ(bloch_project(Vec3(0, 0, 2)), Vec3(0, 0, 1));
  EXPECT_EQ(bloch_project(Vec3(0.3, 0, 0)), Vec3(0.3, 0, 0));
  EXPECT_LT((bloch_project(Vec3(3, 4, 0)) - Vec3(0.6, 0.8, 0)).norm(), 1e-15);
  EXPECT_TRUE(bloch_project_flagged(Vec3(0, 0, 2)).clamped);
  EXPECT_FALSE(bloch_project_flagged(Vec3(0, 0, 1)).clamped);
  EXPECT_THROW(bloch_project(Vec3(std::nan(""), 0, 0)), NumericalError);
}

TEST(Projection, IdempotentAndNonExpansive) {
  Rng rng(14);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 x = test::uniform(rng, 0.0, 3.0) * test::random_direction(rng);
    const Vec3 y = test::uniform(rng, 0.0, 3.0) * test::random_direction(rng);
    const Vec3 px = bloch_project(x);
    EXPECT_LE(px.norm(), 1.0 + 1e-15);
    EXPECT_EQ(bloch_project(px), px);
    EXPECT_LE((px - bloch_project(y)).norm(), (x - y).norm() + 1e-12);
  }
}

TEST(Fidelity, SpecExamples) {
  Rng rng(15);
  EXPECT_NEAR(fidelity(DensityMatrix::ground(), DensityMatrix::excited()), 0.0, 1e-15);
  for (int i = 0; i < 100; ++i) {
    const DensityMatrix rho = test::random_density(rng);
    EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-12);
    // A unit vector in floating point is pure only to ~1e-16 in det, and
    // F depends on sqrt(det); 1e-8 covers that conditioning.
    const DensityMatrix pure = from_coherence(test::random_direction(rng));
    EXPECT_NEAR(fidelity(DensityMatrix::maximally_mixed(), pure), 0.5, 1e-8);
  }
  for (const DensityMatrix& pure : {DensityMatrix::ground(), DensityMatrix::excited(), from_coherence({0, 1, 0})}) {
    EXPECT_NEAR(fidelity(DensityMatrix::maximally_mixed(), pure), 0.5, 1e-15);
  }
}

TEST(Fidelity, MatchesMatrixSquareRootOracle) {
  Rng rng(16);
  for (int i = 0; i < 1000; ++i) {
    const DensityMatrix a = test::random_density(rng);
    const DensityMatrix b = test::random_density(rng);
    EXPECT_NEAR(fidelity(a, b), test::fidelity_oracle(a.matrix(), b.matrix()), 1e-9);
  }
}

TEST(Fidelity, SymmetricUnitarilyInvariantBounded) {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const DensityMatrix a = test::random_density(rng);
    const DensityMatrix b = test::random_density(rng);
    const CMat2 u = test::random_unitary(rng);
    const CMat2 ua = u * a.matrix() * u.adjoint();
    const CMat2 ub = u * b.matrix() * u.adjoint();
    const double f = fidelity(a, b);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
    EXPECT_NEAR(f, fidelity(b, a), 1e-14);
    EXPECT_NEAR(f, fidelity(DensityMatrix::from_matrix(ua), DensityMatrix::from_matrix(ub)), 1e-12);
  }
}

}  // namespace
}  // namespace qmon
