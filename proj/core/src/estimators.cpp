#include "qmon/estimators.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "qmon/error.hpp"

namespace qmon {
namespace {

void check_finite(const Vec3& x, const char* who) {
  if (!x.allFinite()) throw NumericalError(std::string(who) + ": estimate became non-finite");
}

Mat3 symmetrize(const Mat3& m) { return 0.5 * (m + m.transpose()); }

Mat3 clip_psd(const Mat3& p) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(p);
  const Vec3& ev = es.eigenvalues();
  if (ev.minCoeff() >= 0.0) return p;
  const Vec3 clipped = ev.cwiseMax(0.0);
  return symmetrize(es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose());
}

}  // namespace

QfStep qf_step(const QFState& s, double dy, double omega, const QubitModel& model, double dt) {
  const CoherenceVector& x = s.x;
  const double innovation = dy - model.output(x) * dt;
  const Vec3 next = x + model.drift(x, omega) * dt + model.diffusion(x) * innovation;
  check_finite(next, "quantum filter");
  const Projection pr = bloch_project_flagged(next);
  return {QFState{pr.x}, innovation, pr.clamped};
}

QfStep qf_step(const QFState& s, double dy, double omega, const ModelParams& p, double dt) {
  return qf_step(s, dy, omega, QubitModel(p), dt);
}

Vec3 decorrelated_drift(const CoherenceVector& x, double omega, double dy, const QubitModel& model, double dt) {
  const double sb = model.sigma_bar();
  const Vec3 g = model.diffusion(x);
  return model.drift(x, omega) * dt - sb * g * model.output(x) * dt + sb * g * dy;
}

Mat3 jacobian_A(const CoherenceVector& x, double omega, double ydot, const QubitModel& model) {
  const double sb = model.sigma_bar();
  return model.drift_jacobian(omega) + sb * (ydot - model.output(x)) * model.diffusion_jacobian(x) -
         sb * model.diffusion(x) * model.output_row().transpose();
}

double process_noise_variance(const QubitModel& model, const EkfOptions& opts) {
  return opts.paper_literal_qw ? 1.0 + model.sigma_bar() : 1.0 - model.sigma_bar();
}

EKFState ekf_propagate(const EKFState& s, double dy, double omega, const QubitModel& model, double dt,
                       const EkfOptions& opts) {
  EKFState out;
  out.x = s.x + decorrelated_drift(s.x, omega, dy, model, dt);
  check_finite(out.x, "EKF propagate");

  const Mat3 a = jacobian_A(s.x, omega, dy / dt, model);
  const double q = process_noise_variance(model, opts);
  Mat3 q_eff;
  if (opts.paper_literal_g) {
    const Mat3 g = model.diffusion_jacobian(s.x);
    q_eff = q * g * g.transpose();
  } else {
    const Vec3 g = model.diffusion(s.x);
    q_eff = q * g * g.transpose();
  }
  const Mat3 phi = (a * dt).exp();
  out.P = symmetrize(phi * s.P * phi.transpose() + q_eff * dt);
  return out;
}

EkfUpdate ekf_update(const EKFState& prior, double dy, const QubitModel& model, double dt) {
  const Vec3& c = model.output_row();
  const double inv_r = 1.0 / model.sigma_v2();
  const Vec3 pc = prior.P * c;
  const Vec3 gain = pc * inv_r;
  const double innovation = dy - model.output(prior.x) * dt;

  EkfUpdate out;
  const Projection pr = bloch_project_flagged(prior.x + gain * innovation);
  out.state.x = pr.x;
  out.clamped = pr.clamped;
  out.innovation = innovation;
  out.state.P = clip_psd(symmetrize(prior.P - (pc * pc.transpose()) * (inv_r * dt)));
  if (!out.state.P.allFinite()) throw NumericalError("EKF covariance became non-finite");
  return out;
}

QuantumFilter::QuantumFilter(const ModelParams& p, double dt, const CoherenceVector& x0)
    : model_(p), dt_(dt), state_{bloch_project(x0)} {}

void QuantumFilter::step(double dy, double omega) {
  const QfStep r = qf_step(state_, dy, omega, model_, dt_);
  state_ = r.state;
  innovation_ = r.innovation;
  clamps_ += r.clamped ? 1 : 0;
}

FilterOutput QuantumFilter::output() const { return {state_.x, from_coherence(state_.x), {}, std::nullopt}; }

ExtendedKalmanFilter::ExtendedKalmanFilter(const ModelParams& p, double dt, const CoherenceVector& x0,
                                           const Mat3& p0, EkfOptions opts)
    : model_(p), dt_(dt), state_{bloch_project(x0), symmetrize(p0)}, opts_(opts) {}

void ExtendedKalmanFilter::step(double dy, double omega) {
  const EKFState prior = ekf_propagate(state_, dy, omega, model_, dt_, opts_);
  const EkfUpdate post = ekf_update(prior, dy, model_, dt_);
  state_ = post.state;
  clamps_ += post.clamped ? 1 : 0;
}

FilterOutput ExtendedKalmanFilter::output() const {
  return {state_.x, from_coherence(state_.x), {}, state_.P.trace()};
}

}  // namespace qmon
