// Random sampling and independent reference computations shared by the
// unit and acceptance tests.
#pragma once

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Eigenvalues>

#include "qmon/dynamics.hpp"
#include "qmon/qcore.hpp"

namespace qmon::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Vec3 random_direction(Rng& rng) {
  std::normal_distribution<double> n;
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

/// Uniform in the unit ball.
inline Vec3 random_ball(Rng& rng) { return std::cbrt(uniform(rng, 0.0, 1.0)) * random_direction(rng); }

inline CMat2 random_cmat(Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  CMat2 m;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) m(r, c) = {n(rng), n(rng)};
  return m;
}

inline CMat2 random_hermitian(Rng& rng, double scale = 1.0) {
  const CMat2 m = random_cmat(rng, scale);
  return 0.5 * (m + m.adjoint());
}

/// Haar-ish unitary from the QR decomposition of a Ginibre matrix.
inline CMat2 random_unitary(Rng& rng) {
  Eigen::HouseholderQR<CMat2> qr(random_cmat(rng));
  return qr.householderQ();
}

inline DensityMatrix random_density(Rng& rng) { return from_coherence(random_ball(rng)); }

inline ModelParams random_params(Rng& rng) {
  ModelParams p = ModelParams::leaky_cavity(uniform(rng, 0.0, 20.0), uniform(rng, 0.0, 5.0), uniform(rng, 0.0, 1.0),
                                            uniform(rng, 0.0, 100.0), uniform(rng, 0.0, 1.0));
  return p;
}

/// Matrix square root of a PSD Hermitian 2x2 by eigendecomposition.
inline CMat2 psd_sqrt(const CMat2& a) {
  Eigen::SelfAdjointEigenSolver<CMat2> es(a);
  Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// Uhlmann fidelity from matrix square roots.
inline double fidelity_oracle(const CMat2& rho, const CMat2& sigma) {
  const CMat2 s = psd_sqrt(rho);
  const CMat2 inner = psd_sqrt(s * sigma * s);
  const double tr = inner.trace().real();
  return tr * tr;
}

/// SME drift in matrix form: -i[H_d + W H_c, rho] + Gamma D[c_d]rho + M D[c_m]rho.
inline CMat2 sme_drift_matrix(const CMat2& rho, double omega, const ModelParams& p) {
  const Complex i{0.0, 1.0};
  const CMat2 h = p.h_drift + omega * p.h_control;
  auto d = [&](const CMat2& c) {
    const CMat2 cd = c.adjoint();
    return CMat2(c * rho * cd - 0.5 * (cd * c * rho + rho * cd * c));
  };
  return CMat2(-i * (h * rho - rho * h) + p.gamma * d(p.c_decay) + p.measurement_strength * d(p.c_meas));
}

inline CMat2 rho_matrix(const Vec3& x) {
  const Complex i{0.0, 1.0};
  CMat2 m;
  m << 1.0 + x(2), x(0) - i * x(1), x(0) + i * x(1), 1.0 - x(2);
  return 0.5 * m;
}

inline Vec3 bloch_of(const CMat2& m) {
  return {2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(), (m(0, 0) - m(1, 1)).real()};
}

/// Rotation of x about b by |b| t (solution of xdot = b x x).
inline Vec3 rodrigues(const Vec3& x, const Vec3& b, double t) {
  const double w = b.norm();
  if (w == 0.0) return x;
  const Vec3 n = b / w;
  const double th = w * t;
  return x * std::cos(th) + n.cross(x) * std::sin(th) + n * n.dot(x) * (1.0 - std::cos(th));
}

}  // namespace qmon::test
