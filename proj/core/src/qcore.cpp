#include "qmon/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qmon/error.hpp"

namespace qmon {
namespace {

const Complex kI{0.0, 1.0};

CMat2 make(Complex a, Complex b, Complex c, Complex d) {
  CMat2 m;
  m << a, b, c, d;
  return m;
}

// Smallest eigenvalue of a Hermitian 2x2 matrix.
double min_eigenvalue(const CMat2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double off = std::abs(m(0, 1));
  return 0.5 * (a + d - std::hypot(a - d, 2.0 * off));
}

}  // namespace

const CMat2& pauli(int k) {
  static const CMat2 s1 = make(0.0, 1.0, 1.0, 0.0);
  static const CMat2 s2 = make(0.0, -kI, kI, 0.0);
  static const CMat2 s3 = make(1.0, 0.0, 0.0, -1.0);
  switch (k) {
    case 1: return s1;
    case 2: return s2;
    case 3: return s3;
    default:
      throw std::out_of_range("pauli index must be 1, 2 or 3, got " + std::to_string(k));
  }
}

const CMat2& identity2() {
  static const CMat2 id = CMat2::Identity();
  return id;
}

const CMat2& sigma_minus() {
  static const CMat2 m = make(0.0, 1.0, 0.0, 0.0);
  return m;
}

const CMat2& sigma_plus() {
  static const CMat2 p = make(0.0, 0.0, 1.0, 0.0);
  return p;
}

CMat2 commutator(const CMat2& a, const CMat2& b) { return a * b - b * a; }

CMat2 dagger(const CMat2& a) { return a.adjoint(); }

Complex trace_inner(const CMat2& a, const CMat2& b) { return (a * b).trace(); }

double hermiticity_residual(const CMat2& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix() : rho_(0.5 * CMat2::Identity()) {}

DensityMatrix DensityMatrix::from_matrix(const CMat2& rho) {
  if (!rho.allFinite()) throw NumericalError("density matrix has non-finite entries");
  if (hermiticity_residual(rho) > kHermitianTol) {
    throw Error("density matrix is not Hermitian");
  }
  const Complex tr = rho.trace();
  if (std::abs(tr - 1.0) > kTraceTol) throw Error("density matrix trace is not 1");
  if (min_eigenvalue(rho) < -kEigenvalueTol) throw Error("density matrix is not positive semidefinite");
  // Symmetrize away the sub-tolerance anti-Hermitian residue.
  return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

DensityMatrix DensityMatrix::ground() { return DensityMatrix(make(1.0, 0.0, 0.0, 0.0)); }
DensityMatrix DensityMatrix::excited() { return DensityMatrix(make(0.0, 0.0, 0.0, 1.0)); }
DensityMatrix DensityMatrix::maximally_mixed() { return DensityMatrix(); }

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

double DensityMatrix::determinant() const {
  return rho_(0, 0).real() * rho_(1, 1).real() - std::norm(rho_(0, 1));
}

CoherenceVector to_coherence(const DensityMatrix& rho) {
  const CMat2& m = rho.matrix();
  return {2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(), m(0, 0).real() - m(1, 1).real()};
}

CoherenceVector to_coherence(const CMat2& rho) {
  if (hermiticity_residual(rho) > kHermitianTol) {
    throw Error("to_coherence: input is not Hermitian");
  }
  CoherenceVector x;
  for (int k = 1; k <= 3; ++k) x(k - 1) = trace_inner(rho, pauli(k)).real();
  return x;
}

DensityMatrix from_coherence(const CoherenceVector& x) {
  if (!x.allFinite()) throw NumericalError("from_coherence: non-finite coherence vector");
  const double n = x.norm();
  if (n > 1.0 + kBallSlack) {
    throw Error("from_coherence: |x| = " + std::to_string(n) + " lies outside the Bloch ball");
  }
  const Vec3 v = n > 1.0 ? Vec3(x / n) : x;
  return DensityMatrix(make(0.5 * (1.0 + v(2)), Complex(0.5 * v(0), -0.5 * v(1)),
                            Complex(0.5 * v(0), 0.5 * v(1)), 0.5 * (1.0 - v(2))));
}

CMat2 dissipator(const CMat2& c, const CMat2& rho) {
  const CMat2 cd = c.adjoint();
  const CMat2 cdc = cd * c;
  return c * rho * cd - 0.5 * (cdc * rho + rho * cdc);
}

CMat2 meas_superop(const CMat2& c, const CMat2& rho) {
  const CMat2 cd = c.adjoint();
  const Complex expect = trace_inner(c + cd, rho);
  return c * rho + rho * cd - expect * rho;
}

Projection bloch_project_flagged(const Vec3& x) {
  if (!x.allFinite()) throw NumericalError("bloch_project: non-finite input");
  const double n = x.norm();
  if (n <= 1.0) return {x, false};
  // Shave the rounding of x / n so the result is inside and a fixed point.
  Vec3 y = x / n;
  while (y.norm() > 1.0) y *= 1.0 - std::numeric_limits<double>::epsilon();
  return {y, true};
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  const double overlap = trace_inner(rho.matrix(), sigma.matrix()).real();
  const double dets = std::max(0.0, rho.determinant()) * std::max(0.0, sigma.determinant());
  return std::clamp(overlap + 2.0 * std::sqrt(dets), 0.0, 1.0);
}

}  // namespace qmon
