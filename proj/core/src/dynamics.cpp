#include "qmon/dynamics.hpp"

#include <cmath>
#include <string>

#include "qmon/error.hpp"
#include "qmon/noise.hpp"

namespace qmon {
namespace {

const Complex kI{0.0, 1.0};

CMat2 rho_of(const CoherenceVector& x) {
  CMat2 rho = 0.5 * identity2();
  for (int k = 1; k <= 3; ++k) rho += 0.5 * x(k - 1) * pauli(k);
  return rho;
}

// Liouvillian part of the drift without control.
CMat2 free_generator(const ModelParams& p, const CMat2& rho) {
  return -kI * commutator(p.h_drift, rho) + p.gamma * dissipator(p.c_decay, rho) +
         p.measurement_strength * dissipator(p.c_meas, rho);
}

Vec3 project_on_paulis(const CMat2& m) {
  return {trace_inner(m, pauli(1)).real(), trace_inner(m, pauli(2)).real(), trace_inner(m, pauli(3)).real()};
}

// Coefficients (b, B) of a linear superoperator L in the coherence basis,
// Tr(L(rho(x)) sigma_k) = b_k + sum_j B_kj x_j.
template <typename Op>
void linearize(Op&& op, Vec3& offset, Mat3& matrix) {
  offset = project_on_paulis(op(CMat2(0.5 * identity2())));
  for (int j = 1; j <= 3; ++j) matrix.col(j - 1) = project_on_paulis(op(CMat2(0.5 * pauli(j))));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

ModelParams ModelParams::leaky_cavity(double gamma, double measurement_strength, double efficiency,
                                      double omega_r, double sigma_z2) {
  ModelParams p;
  p.gamma = gamma;
  p.measurement_strength = measurement_strength;
  p.efficiency = efficiency;
  p.sigma_z2 = sigma_z2;
  p.omega_r = omega_r;
  p.h_drift = 0.5 * omega_r * pauli(3);
  p.h_control = -pauli(1);
  p.c_decay = sigma_minus();
  p.c_meas = sigma_minus();
  return p;
}

ModelParams ModelParams::with_drift_scaled(double factor) const {
  ModelParams p = *this;
  p.omega_r *= factor;
  p.h_drift *= factor;
  return p;
}

void ModelParams::validate() const {
  require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be finite and >= 0");
  require(std::isfinite(measurement_strength) && measurement_strength >= 0.0,
          "measurement strength M must be finite and >= 0");
  require(std::isfinite(efficiency) && efficiency >= 0.0 && efficiency <= 1.0, "efficiency eta must lie in [0, 1]");
  require(std::isfinite(sigma_z2) && sigma_z2 >= 0.0, "sigma_z2 must be finite and >= 0");
  require(std::isfinite(omega_r), "omega_r must be finite");
  require(h_drift.allFinite() && h_control.allFinite() && c_decay.allFinite() && c_meas.allFinite(),
          "model operators must be finite");
  require(hermiticity_residual(h_drift) <= kHermitianTol, "H_d must be Hermitian");
  require(hermiticity_residual(h_control) <= kHermitianTol, "H_c must be Hermitian");
}

std::size_t NoiseSpec::steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }

void NoiseSpec::validate() const {
  require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
  require(std::isfinite(horizon) && horizon >= dt, "horizon T must be >= dt");
  require(substeps >= 1, "substeps must be >= 1");
  const double n = horizon / dt;
  require(std::abs(n - std::round(n)) < 1e-6, "horizon must be an integer multiple of dt");
}

Vec3 drift_f(const CoherenceVector& x, double omega, const ModelParams& p) {
  const CMat2 rho = rho_of(x);
  const CMat2 hamiltonian = p.h_drift + omega * p.h_control;
  const CMat2 d = -kI * commutator(hamiltonian, rho) + p.gamma * dissipator(p.c_decay, rho) +
                  p.measurement_strength * dissipator(p.c_meas, rho);
  return project_on_paulis(d);
}

Vec3 diffusion_g(const CoherenceVector& x, const ModelParams& p) {
  const double k = std::sqrt(p.efficiency * p.measurement_strength);
  return k * project_on_paulis(meas_superop(p.c_meas, rho_of(x)));
}

double output_h(const CoherenceVector& x, const ModelParams& p) {
  const double k = std::sqrt(p.efficiency * p.measurement_strength);
  const CMat2 quad = p.c_meas + p.c_meas.adjoint();
  double s = quad.trace().real();
  for (int j = 1; j <= 3; ++j) s += x(j - 1) * trace_inner(quad, pauli(j)).real();
  return 0.5 * k * s;
}

Vec3 output_matrix_C(const ModelParams& p) {
  const double k = std::sqrt(p.efficiency * p.measurement_strength);
  const CMat2 quad = p.c_meas + p.c_meas.adjoint();
  return 0.5 * k * project_on_paulis(quad);
}

QubitModel::QubitModel(const ModelParams& params) : params_(params) {
  params_.validate();
  linearize([&](const CMat2& rho) { return free_generator(params_, rho); }, f0_, f_);
  linearize([&](const CMat2& rho) { return CMat2(-kI * commutator(params_.h_control, rho)); }, fc0_, fc_);
  const CMat2& c = params_.c_meas;
  linearize([&](const CMat2& rho) { return CMat2(c * rho + rho * c.adjoint()); }, a_, b_);
  k_ = std::sqrt(params_.efficiency * params_.measurement_strength);
  c_ = output_matrix_C(params_);
  h0_ = 0.5 * k_ * (c + c.adjoint()).trace().real();
  sigma_bar_ = params_.sigma_bar();
  sigma_v2_ = params_.sigma_v2();
}

Vec3 QubitModel::drift(const CoherenceVector& x, double omega) const {
  return f0_ + f_ * x + omega * (fc0_ + fc_ * x);
}

Vec3 QubitModel::diffusion(const CoherenceVector& x) const {
  return k_ * (a_ + b_ * x) - output(x) * x;
}

Mat3 QubitModel::diffusion_jacobian(const CoherenceVector& x) const {
  return k_ * b_ - x * c_.transpose() - output(x) * Mat3::Identity();
}

StepResult em_step(const CoherenceVector& x, double omega, double dw, const QubitModel& model, double dt) {
  const Vec3 next = x + model.drift(x, omega) * dt + model.diffusion(x) * dw;
  const Projection pr = bloch_project_flagged(next);
  return {pr.x, pr.clamped};
}

StepResult em_step(const CoherenceVector& x, double omega, double dw, const ModelParams& p, double dt) {
  return em_step(x, omega, dw, QubitModel(p), dt);
}

TrajectoryRecord simulate_trajectory(const ModelParams& p, const NoiseSpec& noise, const CoherenceVector& x0,
                                     ControlPolicy* policy, std::uint64_t trajectory) {
  noise.validate();
  if (!x0.allFinite() || x0.norm() > 1.0 + kBallSlack) {
    throw ConfigError("initial coherence vector must lie in the Bloch ball");
  }
  const QubitModel model(p);
  const CounterNormal normal(noise.seed, trajectory);
  const std::size_t n = noise.steps();
  const int sub = noise.substeps;
  const double dt = noise.dt;
  const double ds = dt / sub;
  const double sqrt_ds = std::sqrt(ds);
  const double dz_scale = std::sqrt(p.sigma_z2 * dt);

  TrajectoryRecord rec;
  rec.dt = dt;
  rec.substeps = sub;
  rec.trajectory = trajectory;
  rec.t.reserve(n + 1);
  rec.x.reserve(n + 1);
  rec.omega.reserve(n + 1);
  rec.dy.reserve(n);
  rec.dw.reserve(n);
  rec.dz.reserve(n);

  CoherenceVector x = bloch_project(x0);
  auto control_at = [&](std::size_t i, double t) {
    const double w = policy ? policy->control(i, t, x) : 0.0;
    if (!std::isfinite(w)) {
      throw NumericalError("control policy returned a non-finite value at step " + std::to_string(i) +
                           " (t = " + std::to_string(t) + ")");
    }
    return w;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    rec.t.push_back(t);
    rec.x.push_back(x);
    const double omega = control_at(i, t);
    rec.omega.push_back(omega);

    double dy = 0.0;
    double dw_total = 0.0;
    for (int s = 0; s < sub; ++s) {
      const double dw = sqrt_ds * normal(i, static_cast<std::uint32_t>(s), NoiseStream::kWiener);
      dy += model.output(x) * ds + dw;
      dw_total += dw;
      const StepResult r = em_step(x, omega, dw, model, ds);
      x = r.x;
      rec.projection_count += r.clamped ? 1 : 0;
    }
    const double dz = dz_scale * normal(i, 0, NoiseStream::kAnalyzer);
    dy += dz;
    rec.substep_count += static_cast<std::size_t>(sub);
    if (!std::isfinite(dy)) throw NumericalError("non-finite measurement at step " + std::to_string(i));
    rec.dy.push_back(dy);
    rec.dw.push_back(dw_total);
    rec.dz.push_back(dz);
    if (policy) policy->observe(i, dy, omega);
  }
  const double t_end = static_cast<double>(n) * dt;
  rec.t.push_back(t_end);
  rec.x.push_back(x);
  rec.omega.push_back(control_at(n, t_end));
  return rec;
}

DeterministicTrajectory lindblad_reference(const ModelParams& p, const ControlSignal& omega,
                                           const CoherenceVector& x0, double dt, double horizon) {
  NoiseSpec grid;
  grid.dt = dt;
  grid.horizon = horizon;
  grid.validate();
  const QubitModel model(p);
  const std::size_t n = grid.steps();
  DeterministicTrajectory out;
  out.t.reserve(n + 1);
  out.x.reserve(n + 1);
  Vec3 x = x0;
  out.t.push_back(0.0);
  out.x.push_back(x);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double w = omega(t);
    const Vec3 k1 = model.drift(x, w);
    const Vec3 k2 = model.drift(x + 0.5 * dt * k1, w);
    const Vec3 k3 = model.drift(x + 0.5 * dt * k2, w);
    const Vec3 k4 = model.drift(x + dt * k3, w);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.t.push_back(static_cast<double>(i + 1) * dt);
    out.x.push_back(x);
  }
  return out;
}

DeterministicTrajectory lindblad_reference(const ModelParams& p, double omega, const CoherenceVector& x0,
                                           double dt, double horizon) {
  return lindblad_reference(p, [omega](double) { return omega; }, x0, dt, horizon);
}

}  // namespace qmon
