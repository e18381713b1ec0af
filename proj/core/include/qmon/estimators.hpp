// State observers driven by the homodyne record: the quantum filter, the
// decorrelated extended Kalman filter and the multiple-model adaptive
// estimator built on banks of either.
#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "qmon/dynamics.hpp"
#include "qmon/qcore.hpp"

namespace qmon {

// ---------------------------------------------------------------------------
// Quantum filter
// ---------------------------------------------------------------------------

struct QFState {
  CoherenceVector x = CoherenceVector::Zero();
};

struct QfStep {
  QFState state;
  double innovation = 0.0;  ///< dy - h(x) dt
  bool clamped = false;     ///< Bloch-ball safety clamp was active
};

/// x' = Proj(x + f(x, W) dt + g(x)(dy - h(x) dt)).
QfStep qf_step(const QFState& s, double dy, double omega, const QubitModel& model, double dt);
QfStep qf_step(const QFState& s, double dy, double omega, const ModelParams& p, double dt);

// ---------------------------------------------------------------------------
// Decorrelated extended Kalman filter
// ---------------------------------------------------------------------------

struct EkfOptions {
  /// Use sigma_wbar^2 = 1 + sigma_bar instead of the variance of
  /// dW - sigma_bar dV, which is 1 - sigma_bar.
  bool paper_literal_qw = false;
  /// Use sigma_wbar^2 G G^T with G = dg/dx instead of sigma_wbar^2 g g^T.
  bool paper_literal_g = false;
};

struct EKFState {
  CoherenceVector x = CoherenceVector::Zero();
  Mat3 P = Mat3::Identity();
};

/// fbar dt = f dt - sigma_bar g h dt + sigma_bar g dy.
Vec3 decorrelated_drift(const CoherenceVector& x, double omega, double dy, const QubitModel& model, double dt);

/// d fbar / dx with the measured rate ydot = dy/dt held fixed:
/// F + W Fc + sigma_bar (ydot - h) dg/dx - sigma_bar g C^T.
Mat3 jacobian_A(const CoherenceVector& x, double omega, double ydot, const QubitModel& model);

/// Effective variance of the decorrelated process noise per unit time.
double process_noise_variance(const QubitModel& model, const EkfOptions& opts);

/// Prediction: x- = x + fbar dt, P- = Phi P Phi^T + Q_eff dt with
/// Phi = exp(A dt). Agrees with P + (AP + PA^T + Q_eff) dt to first order.
EKFState ekf_propagate(const EKFState& s, double dy, double omega, const QubitModel& model, double dt,
                       const EkfOptions& opts = {});

struct EkfUpdate {
  EKFState state;
  double innovation = 0.0;
  bool clamped = false;
};

/// Correction: K = P- C^T / sigma_v^2, x = Proj(x- + K (dy - h(x-) dt)),
/// P = P- - P- C^T C P- dt / sigma_v^2, symmetrized and clipped to PSD.
EkfUpdate ekf_update(const EKFState& prior, double dy, const QubitModel& model, double dt);

// ---------------------------------------------------------------------------
// Observers
// ---------------------------------------------------------------------------

struct FilterOutput {
  CoherenceVector x;
  DensityMatrix rho;
  std::vector<double> weights;         ///< MMAE only
  std::optional<double> trace_p;       ///< EKF only
};

/// A recursive estimator advanced once per measurement increment.
class Observer {
 public:
  virtual ~Observer() = default;
  virtual void step(double dy, double omega) = 0;
  virtual const CoherenceVector& estimate() const = 0;
  virtual FilterOutput output() const = 0;
  virtual const QubitModel& model() const = 0;
  /// Number of steps where a projection onto the Bloch ball was active.
  virtual std::size_t clamp_count() const = 0;
};

class QuantumFilter final : public Observer {
 public:
  QuantumFilter(const ModelParams& p, double dt, const CoherenceVector& x0);

  void step(double dy, double omega) override;
  const CoherenceVector& estimate() const override { return state_.x; }
  FilterOutput output() const override;
  const QubitModel& model() const override { return model_; }
  std::size_t clamp_count() const override { return clamps_; }
  double last_innovation() const { return innovation_; }

 private:
  QubitModel model_;
  double dt_;
  QFState state_;
  double innovation_ = 0.0;
  std::size_t clamps_ = 0;
};

class ExtendedKalmanFilter final : public Observer {
 public:
  ExtendedKalmanFilter(const ModelParams& p, double dt, const CoherenceVector& x0, const Mat3& p0,
                       EkfOptions opts = {});

  void step(double dy, double omega) override;
  const CoherenceVector& estimate() const override { return state_.x; }
  FilterOutput output() const override;
  const QubitModel& model() const override { return model_; }
  std::size_t clamp_count() const override { return clamps_; }
  const EKFState& state() const { return state_; }

 private:
  QubitModel model_;
  double dt_;
  EKFState state_;
  EkfOptions opts_;
  std::size_t clamps_ = 0;
};

// ---------------------------------------------------------------------------
// Multiple-model adaptive estimation
// ---------------------------------------------------------------------------

/// p_l <- beta_l e^{-w_l} p_l / sum_j beta_j e^{-w_j} p_j, evaluated in the
/// log domain. An optional floor is applied before renormalizing. Weights
/// never underflow to exactly zero.
std::vector<double> mmae_update_weights(std::span<const double> p, std::span<const double> beta,
                                        std::span<const double> w, double floor = 0.0);

/// Windowed innovation energy
///   w = (sum_window (dy - h(xhat) dt))^2 / (sigma_v^2 * window * dt),
/// a unit-variance chi-square statistic for a matched model.
double error_measure(std::span<const double> dy, std::span<const CoherenceVector> xhat, const QubitModel& model,
                     double dt);

/// Convex combination sum_l p_l xhat_l.
CoherenceVector mmae_combine(std::span<const double> p, std::span<const CoherenceVector> xhat);

enum class MemberKind { kEkf, kQuantumFilter };

struct MmaeOptions {
  MemberKind members = MemberKind::kEkf;
  std::vector<double> beta;  ///< empty means 1 for every model
  int cadence = 10;          ///< steps per weight update
  double weight_floor = 0.0;
  EkfOptions ekf;
  Mat3 p0 = Mat3::Identity();
};

class MultipleModelEstimator final : public Observer {
 public:
  MultipleModelEstimator(std::vector<ModelParams> models, double dt, const CoherenceVector& x0,
                         MmaeOptions opts = {});

  void step(double dy, double omega) override;
  const CoherenceVector& estimate() const override { return combined_; }
  FilterOutput output() const override;
  /// Model of the currently dominant member.
  const QubitModel& model() const override;
  std::size_t clamp_count() const override;

  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return members_.size(); }
  const Observer& member(std::size_t i) const { return *members_[i]; }
  /// Most recent error measures (zero until the first update).
  const std::vector<double>& last_error() const { return last_w_; }
  std::size_t weight_updates() const { return updates_; }

 private:
  std::vector<std::unique_ptr<Observer>> members_;
  std::vector<double> weights_;
  std::vector<double> beta_;
  std::vector<double> innovation_sum_;
  std::vector<double> last_w_;
  CoherenceVector combined_;
  double dt_;
  int cadence_;
  double floor_;
  int window_fill_ = 0;
  std::size_t updates_ = 0;
};

}  // namespace qmon
