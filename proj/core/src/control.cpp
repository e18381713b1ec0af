#include "qmon/control.hpp"

#include <algorithm>
#include <cmath>

#include "qmon/error.hpp"

namespace qmon {
namespace {

const Complex kI{0.0, 1.0};

// Relative slack on dwell comparisons so that t - t_last computed from a
// uniform grid still satisfies an exact multiple of dt.
constexpr double kDwellSlack = 1e-9;

bool dwell_elapsed(double t, double t_last, double dwell) {
  return t - t_last >= dwell * (1.0 - kDwellSlack);
}

}  // namespace

TargetSpec TargetSpec::make(const DensityMatrix& rho_f, const ModelParams& p) {
  const double residual = commutator(rho_f.matrix(), p.h_drift).cwiseAbs().maxCoeff();
  if (residual >= 1e-10) throw ConfigError("target state must commute with the drift Hamiltonian");
  return {rho_f, identity2() - rho_f.matrix()};
}

ControllerParams ControllerParams::defaults_for(const ModelParams& p, double dt) {
  ControllerParams cp;
  cp.dwell_active = 10.0 * dt;
  cp.dwell_idle = 10.0 * dt;
  cp.omega_max = 10.0 * p.gamma;
  return cp;
}

void ControllerParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(alpha)) throw ConfigError("controller alpha must be > 0");
  if (!positive(epsilon)) throw ConfigError("controller epsilon must be > 0");
  if (!positive(dwell_active) || !positive(dwell_idle)) throw ConfigError("controller dwell times must be > 0");
  if (!positive(omega_max)) throw ConfigError("controller omega_max must be > 0");
  if (epsilon_on && !positive(*epsilon_on)) throw ConfigError("controller epsilon_on must be > 0");
}

double lyapunov_V(const DensityMatrix& rho, const TargetSpec& target) {
  return trace_inner(target.pi, rho.matrix()).real();
}

Upsilons upsilons(const DensityMatrix& rho, const TargetSpec& target, const ModelParams& p, double alpha) {
  const CMat2& r = rho.matrix();
  const Complex y0 = p.gamma * trace_inner(target.pi, dissipator(p.c_decay, r)) +
                     p.measurement_strength * trace_inner(target.pi, dissipator(p.c_meas, r)) +
                     alpha * trace_inner(target.pi, r);
  const Complex y1 = trace_inner(target.pi, commutator(p.h_control, r));
  return {y0.real(), y1.imag()};
}

double lyapunov_control_law(const Upsilons& u) {
  if (u.y1_imag == 0.0) return 0.0;
  return -u.y0 / u.y1_imag;
}

double control_value(const DensityMatrix& rho, const TargetSpec& target, const ModelParams& p,
                     const ControllerParams& cp, const ControllerState& cs) {
  if (cs.phase == Phase::kIdle) return 0.0;
  const double raw = lyapunov_control_law(upsilons(rho, target, p, cp.alpha));
  return std::clamp(raw, -cp.omega_max, cp.omega_max);
}

ControllerState switch_logic(const ControllerState& cs, double y1_imag, double t, const ControllerParams& cp) {
  ControllerState next = cs;
  const double mag = std::abs(y1_imag);
  if (cs.phase == Phase::kActive) {
    if (mag <= cp.epsilon && dwell_elapsed(t, cs.t_last_switch, cp.dwell_active)) {
      next.phase = Phase::kIdle;
      next.t_last_switch = t;
      ++next.switches;
    }
  } else {
    const double on = cp.epsilon_on.value_or(cp.epsilon);
    if (mag >= on && dwell_elapsed(t, cs.t_last_switch, cp.dwell_idle)) {
      next.phase = Phase::kActive;
      next.t_last_switch = t;
      ++next.switches;
    }
  }
  return next;
}

double generator_LV(const DensityMatrix& rho, double omega, const TargetSpec& target, const ModelParams& p) {
  const CMat2& r = rho.matrix();
  const Complex lv = -kI * omega * trace_inner(target.pi, commutator(p.h_control, r)) +
                     p.gamma * trace_inner(target.pi, dissipator(p.c_decay, r)) +
                     p.measurement_strength * trace_inner(target.pi, dissipator(p.c_meas, r));
  return lv.real();
}

LyapunovController::LyapunovController(const TargetSpec& target, const ModelParams& p, const ControllerParams& cp,
                                       double t0)
    : target_(target), model_(p), cp_(cp) {
  cp_.validate();
  state_.t_last_switch = t0;
}

double LyapunovController::update(double t, const DensityMatrix& rho) {
  const Upsilons u = upsilons(rho, target_, model_, cp_.alpha);
  const ControllerState next = switch_logic(state_, u.y1_imag, t, cp_);
  if (next.switches != state_.switches) switch_times_.push_back(t);
  state_ = next;
  if (state_.phase == Phase::kIdle) return 0.0;
  if (u.y1_imag == 0.0) {
    ++singular_;
    return 0.0;
  }
  return std::clamp(lyapunov_control_law(u), -cp_.omega_max, cp_.omega_max);
}

}  // namespace qmon
