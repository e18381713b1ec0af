// Switching Lyapunov controller for V(rho) = Tr(Pi rho), Pi = I - rho_f.
//
// During Active intervals the control enforces L(V) = -alpha V with the
// minimum-effort value Omega = -i Y0 / Y1; it idles (Omega = 0) while
// |Im Y1| stays below epsilon, with dwell times between switches.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qmon/dynamics.hpp"
#include "qmon/qcore.hpp"

namespace qmon {

struct TargetSpec {
  DensityMatrix rho_f;
  CMat2 pi;  ///< I - rho_f

  /// Throws ConfigError unless ||[rho_f, H_d]|| < 1e-10.
  static TargetSpec make(const DensityMatrix& rho_f, const ModelParams& p);
};

struct ControllerParams {
  double alpha = 5.0;          ///< enforced decay rate of V [1/s]
  double epsilon = 0.01;       ///< threshold on |Im Y1|
  double dwell_active = 1e-2;  ///< minimum Active interval Delta_1 [s]
  double dwell_idle = 1e-2;    ///< minimum Idle interval Delta_2 [s]
  double omega_max = 100.0;    ///< saturation [rad/s]
  /// Idle -> Active threshold; unset means epsilon (no hysteresis).
  std::optional<double> epsilon_on;

  /// dwell = 10 dt, omega_max = 10 Gamma.
  static ControllerParams defaults_for(const ModelParams& p, double dt);
  void validate() const;
};

enum class Phase { kActive, kIdle };

struct ControllerState {
  Phase phase = Phase::kActive;
  double t_last_switch = 0.0;
  std::size_t switches = 0;
};

double lyapunov_V(const DensityMatrix& rho, const TargetSpec& target);

struct Upsilons {
  double y0 = 0.0;      ///< Y0 (real)
  double y1_imag = 0.0; ///< Y1 = i * y1_imag
};

/// Y0 = Gamma Tr(Pi D[c_d]rho) + M Tr(Pi D[c_m]rho) + alpha Tr(Pi rho),
/// Y1 = Tr(Pi [H_c, rho]).
Upsilons upsilons(const DensityMatrix& rho, const TargetSpec& target, const ModelParams& p, double alpha);

/// Unsaturated Active-phase law -Y0 / Im(Y1); 0 when Im(Y1) == 0.
double lyapunov_control_law(const Upsilons& u);

/// Saturated control for the given phase. Idle gives 0.
double control_value(const DensityMatrix& rho, const TargetSpec& target, const ModelParams& p,
                     const ControllerParams& cp, const ControllerState& cs);

/// Dwell-time switching on |Im Y1|.
ControllerState switch_logic(const ControllerState& cs, double y1_imag, double t, const ControllerParams& cp);

/// Drift of V under the SME:
/// -i Omega Tr(Pi [H_c, rho]) + Gamma Tr(Pi D[c_d]rho) + M Tr(Pi D[c_m]rho).
/// The H_d term vanishes because the target commutes with H_d.
double generator_LV(const DensityMatrix& rho, double omega, const TargetSpec& target, const ModelParams& p);

/// Stateful controller: switch_logic followed by control_value.
class LyapunovController {
 public:
  LyapunovController(const TargetSpec& target, const ModelParams& p, const ControllerParams& cp, double t0 = 0.0);

  double update(double t, const DensityMatrix& rho);

  const ControllerState& state() const { return state_; }
  const std::vector<double>& switch_times() const { return switch_times_; }
  /// Active steps where Im(Y1) was exactly zero.
  std::size_t singular_count() const { return singular_; }
  const TargetSpec& target() const { return target_; }
  const ControllerParams& params() const { return cp_; }

 private:
  TargetSpec target_;
  ModelParams model_;
  ControllerParams cp_;
  ControllerState state_;
  std::vector<double> switch_times_;
  std::size_t singular_ = 0;
};

}  // namespace qmon
