// Coherence-vector form of the homodyne stochastic master equation
//
//   dx = f(x, Omega) dt + g(x) dW,      dy = h(x) dt + dW + dZ,
//
// its Euler-Maruyama integrator, and deterministic Lindblad references.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "qmon/qcore.hpp"

namespace qmon {

/// Physical model. Defaults are the qubit-in-a-leaky-cavity configuration:
/// H_d = (omega_r/2) sigma_3, H_c = -sigma_1, c_d = c_m = sigma_-.
struct ModelParams {
  double gamma = 10.0;               ///< decay rate Gamma [1/s]
  double measurement_strength = 1.0; ///< M [1/s]
  double efficiency = 0.8;           ///< detector efficiency eta in [0, 1]
  double sigma_z2 = 0.1;             ///< spectrum-analyzer noise variance
  double omega_r = 50.0;             ///< drift frequency [rad/s], informational once h_drift is set
  CMat2 h_drift = 25.0 * pauli(3);
  CMat2 h_control = -pauli(1);
  CMat2 c_decay = sigma_minus();
  CMat2 c_meas = sigma_minus();

  static ModelParams leaky_cavity(double gamma, double measurement_strength, double efficiency,
                                  double omega_r, double sigma_z2 = 0.1);

  /// Copy with the drift Hamiltonian (and omega_r) multiplied by `factor`.
  ModelParams with_drift_scaled(double factor) const;

  /// Throws ConfigError when a physical bound is violated.
  void validate() const;

  /// sigma_bar = 1 / (1 + sigma_z^2).
  double sigma_bar() const { return 1.0 / (1.0 + sigma_z2); }
  /// sigma_v^2 = 1 + sigma_z^2, the output-noise intensity.
  double sigma_v2() const { return 1.0 + sigma_z2; }
};

struct NoiseSpec {
  std::uint64_t seed = 0;
  double dt = 1e-3;       ///< measurement sampling interval [s]
  double horizon = 1.0;   ///< T [s]
  /// Euler-Maruyama sub-steps per dt for the true state. 1 reproduces a
  /// plain Euler-Maruyama record at dt.
  int substeps = 1;

  std::size_t steps() const;
  void validate() const;
};

// Trace-form model fields, evaluated directly from the superoperators.
Vec3 drift_f(const CoherenceVector& x, double omega, const ModelParams& p);
Vec3 diffusion_g(const CoherenceVector& x, const ModelParams& p);
double output_h(const CoherenceVector& x, const ModelParams& p);
/// c_k = (sqrt(eta M)/2) Tr((c_m + c_m^dag) sigma_k), so h(x) = h(0) + C.x.
Vec3 output_matrix_C(const ModelParams& p);

/// Precomputed affine/quadratic coefficients of f, g and h:
///   f(x, W) = f0 + F x + W (fc0 + Fc x)
///   g(x)    = k (a + B x) - h(x) x,       k = sqrt(eta M)
///   h(x)    = h0 + C.x
/// Equal to the trace-form fields to rounding; used on hot paths.
class QubitModel {
 public:
  explicit QubitModel(const ModelParams& params);

  const ModelParams& params() const { return params_; }

  Vec3 drift(const CoherenceVector& x, double omega) const;
  Vec3 diffusion(const CoherenceVector& x) const;
  double output(const CoherenceVector& x) const { return h0_ + c_.dot(x); }

  /// df/dx, independent of x.
  Mat3 drift_jacobian(double omega) const { return f_ + omega * fc_; }
  /// dg/dx = k B - x C^T - h(x) I.
  Mat3 diffusion_jacobian(const CoherenceVector& x) const;
  const Vec3& output_row() const { return c_; }
  double output_offset() const { return h0_; }

  double sigma_bar() const { return sigma_bar_; }
  double sigma_v2() const { return sigma_v2_; }

 private:
  ModelParams params_;
  Vec3 f0_, fc0_, a_, c_;
  Mat3 f_, fc_, b_;
  double k_ = 0.0;
  double h0_ = 0.0;
  double sigma_bar_ = 1.0;
  double sigma_v2_ = 1.0;
};

struct StepResult {
  CoherenceVector x;
  bool clamped = false;  ///< projection onto the Bloch ball was active
};

/// One Euler-Maruyama step, Proj(x + f dt + g dW).
StepResult em_step(const CoherenceVector& x, double omega, double dw, const QubitModel& model, double dt);
StepResult em_step(const CoherenceVector& x, double omega, double dw, const ModelParams& p, double dt);

/// Feedback hook for simulate_trajectory.
class ControlPolicy {
 public:
  virtual ~ControlPolicy() = default;
  /// Control applied over [t_step, t_step + dt). x_true is offered for
  /// state-feedback laws; observer-based policies ignore it.
  virtual double control(std::size_t step, double t, const CoherenceVector& x_true) = 0;
  /// Measurement increment over the step that just completed.
  virtual void observe(std::size_t /*step*/, double /*dy*/, double /*omega*/) {}
};

class ConstantControl final : public ControlPolicy {
 public:
  explicit ConstantControl(double omega) : omega_(omega) {}
  double control(std::size_t, double, const CoherenceVector&) override { return omega_; }

 private:
  double omega_;
};

/// Synchronized record of one realization. x and omega hold N + 1 samples
/// (grid t_0..t_N); dy, dw and dz hold the N increments over [t_i, t_i+1).
/// omega[N] is the control the policy would apply at t_N.
struct TrajectoryRecord {
  double dt = 0.0;
  int substeps = 1;
  std::uint64_t trajectory = 0;
  std::vector<double> t;
  std::vector<CoherenceVector> x;
  std::vector<double> dy;
  std::vector<double> dw;  ///< sum of the Wiener sub-increments over each dt
  std::vector<double> dz;
  std::vector<double> omega;
  std::size_t projection_count = 0;  ///< clamped Euler-Maruyama sub-steps
  std::size_t substep_count = 0;
};

/// Integrates the true state and its homodyne record. A null policy means
/// Omega = 0. Throws NumericalError if the policy returns a non-finite value
/// or the state leaves the finite range.
TrajectoryRecord simulate_trajectory(const ModelParams& p, const NoiseSpec& noise, const CoherenceVector& x0,
                                     ControlPolicy* policy = nullptr, std::uint64_t trajectory = 0);

struct DeterministicTrajectory {
  std::vector<double> t;
  std::vector<CoherenceVector> x;
};

/// Piecewise-constant control: evaluated at the start of each step.
using ControlSignal = std::function<double(double)>;

/// Classical RK4 integration of dx/dt = f(x, Omega(t)), the noise-free
/// (Lindblad) evolution and the ensemble-mean oracle of the SME.
DeterministicTrajectory lindblad_reference(const ModelParams& p, const ControlSignal& omega,
                                           const CoherenceVector& x0, double dt, double horizon);
DeterministicTrajectory lindblad_reference(const ModelParams& p, double omega, const CoherenceVector& x0,
                                           double dt, double horizon);

}  // namespace qmon
