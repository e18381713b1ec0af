// Fixed-size qubit algebra: Pauli basis, density matrices and their
// coherence (Bloch) vectors, Lindblad and homodyne-backaction superoperators,
// fidelity and the Bloch-ball projection.
//
// Basis convention used across the library:
//   |g> = (1, 0)^T, |e> = (0, 1)^T, sigma_3 = |g><g| - |e><e| = diag(1, -1),
//   sigma_- = |g><e| (lowering).
#pragma once

#include <complex>

#include <Eigen/Core>

namespace qmon {

using Complex = std::complex<double>;
using CMat2 = Eigen::Matrix2cd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Real 3-vector x with rho = (I + sum_k x_k sigma_k) / 2.
using CoherenceVector = Vec3;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kEigenvalueTol = 1e-12;
/// Largest norm from_coherence accepts before asking the caller to project.
inline constexpr double kBallSlack = 1e-9;

/// sigma_k for k in {1, 2, 3}; throws std::out_of_range otherwise.
const CMat2& pauli(int k);
const CMat2& identity2();
const CMat2& sigma_minus();
const CMat2& sigma_plus();

CMat2 commutator(const CMat2& a, const CMat2& b);
CMat2 dagger(const CMat2& a);
/// Tr(AB).
Complex trace_inner(const CMat2& a, const CMat2& b);
/// max |A - A^dagger| entry.
double hermiticity_residual(const CMat2& a);

/// 2x2 Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  /// Maximally mixed state I/2.
  DensityMatrix();

  /// Validates Hermiticity, trace and eigenvalues against the 1e-12
  /// tolerances; throws qmon::Error on violation.
  static DensityMatrix from_matrix(const CMat2& rho);

  static DensityMatrix ground();
  static DensityMatrix excited();
  static DensityMatrix maximally_mixed();

  const CMat2& matrix() const { return rho_; }
  Complex operator()(int r, int c) const { return rho_(r, c); }

  double purity() const;
  double determinant() const;

 private:
  explicit DensityMatrix(const CMat2& rho) : rho_(rho) {}
  friend DensityMatrix from_coherence(const CoherenceVector& x);

  CMat2 rho_;
};

/// x_k = Tr(rho sigma_k).
CoherenceVector to_coherence(const DensityMatrix& rho);
/// Same map on a raw matrix; throws if the input is not Hermitian within
/// kHermitianTol.
CoherenceVector to_coherence(const CMat2& rho);

/// rho = (I + x.sigma)/2. Throws if |x| > 1 + kBallSlack.
DensityMatrix from_coherence(const CoherenceVector& x);

/// D[c]rho = c rho c^dag - (c^dag c rho + rho c^dag c)/2.
CMat2 dissipator(const CMat2& c, const CMat2& rho);
inline CMat2 dissipator(const CMat2& c, const DensityMatrix& rho) {
  return dissipator(c, rho.matrix());
}

/// H[c]rho = c rho + rho c^dag - Tr((c + c^dag) rho) rho.
CMat2 meas_superop(const CMat2& c, const CMat2& rho);
inline CMat2 meas_superop(const CMat2& c, const DensityMatrix& rho) {
  return meas_superop(c, rho.matrix());
}

struct Projection {
  CoherenceVector x;
  bool clamped = false;
};

/// Radial projection onto the closed unit ball, x / max(1, |x|).
/// Throws qmon::NumericalError on non-finite input.
Projection bloch_project_flagged(const Vec3& x);
inline CoherenceVector bloch_project(const Vec3& x) {
  return bloch_project_flagged(x).x;
}

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, evaluated with
/// the qubit closed form Tr(rho sigma) + 2 sqrt(det rho det sigma).
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

}  // namespace qmon
