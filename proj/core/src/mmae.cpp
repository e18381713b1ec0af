#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qmon/error.hpp"
#include "qmon/estimators.hpp"

namespace qmon {

std::vector<double> mmae_update_weights(std::span<const double> p, std::span<const double> beta,
                                        std::span<const double> w, double floor) {
  const std::size_t n = p.size();
  if (n == 0 || beta.size() != n || w.size() != n) throw Error("mmae_update_weights: size mismatch");
  std::vector<double> logits(n);
  for (std::size_t l = 0; l < n; ++l) {
    if (!(p[l] > 0.0) || !(beta[l] > 0.0) || !(w[l] >= 0.0) || !std::isfinite(w[l])) {
      throw Error("mmae_update_weights: need p > 0, beta > 0, finite w >= 0");
    }
    logits[l] = std::log(p[l]) + std::log(beta[l]) - w[l];
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(n);
  for (std::size_t l = 0; l < n; ++l) out[l] = std::exp(logits[l] - top);
  double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (!(total > 0.0)) throw NumericalError("mmae_update_weights: vanishing normalizer");
  for (double& v : out) v /= total;

  if (floor > 0.0) {
    for (double& v : out) v = std::max(v, floor);
    total = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& v : out) v /= total;
  }
  constexpr double kTiny = std::numeric_limits<double>::min();
  for (double& v : out) v = std::max(v, kTiny);
  return out;
}

double error_measure(std::span<const double> dy, std::span<const CoherenceVector> xhat, const QubitModel& model,
                     double dt) {
  if (dy.size() != xhat.size() || dy.empty()) throw Error("error_measure: window size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < dy.size(); ++i) sum += dy[i] - model.output(xhat[i]) * dt;
  return sum * sum / (model.sigma_v2() * static_cast<double>(dy.size()) * dt);
}

CoherenceVector mmae_combine(std::span<const double> p, std::span<const CoherenceVector> xhat) {
  if (p.size() != xhat.size()) throw Error("mmae_combine: size mismatch");
  CoherenceVector x = CoherenceVector::Zero();
  for (std::size_t l = 0; l < p.size(); ++l) x += p[l] * xhat[l];
  return x;
}

MultipleModelEstimator::MultipleModelEstimator(std::vector<ModelParams> models, double dt,
                                               const CoherenceVector& x0, MmaeOptions opts)
    : dt_(dt), cadence_(opts.cadence), floor_(opts.weight_floor) {
  const std::size_t n = models.size();
  if (n == 0) throw ConfigError("MMAE bank needs at least one model");
  if (cadence_ < 1) throw ConfigError("MMAE cadence must be >= 1");
  if (!(floor_ >= 0.0) || floor_ * static_cast<double>(n) >= 1.0) {
    throw ConfigError("MMAE weight floor must satisfy 0 <= floor < 1/N");
  }
  beta_ = opts.beta.empty() ? std::vector<double>(n, 1.0) : opts.beta;
  if (beta_.size() != n) throw ConfigError("MMAE beta must have one entry per model");
  for (double b : beta_) {
    if (!(b > 0.0)) throw ConfigError("MMAE beta entries must be positive");
  }
  members_.reserve(n);
  for (const ModelParams& m : models) {
    if (opts.members == MemberKind::kEkf) {
      members_.push_back(std::make_unique<ExtendedKalmanFilter>(m, dt, x0, opts.p0, opts.ekf));
    } else {
      members_.push_back(std::make_unique<QuantumFilter>(m, dt, x0));
    }
  }
  weights_.assign(n, 1.0 / static_cast<double>(n));
  innovation_sum_.assign(n, 0.0);
  last_w_.assign(n, 0.0);
  combined_ = bloch_project(x0);
}

void MultipleModelEstimator::step(double dy, double omega) {
  for (std::size_t l = 0; l < members_.size(); ++l) {
    Observer& m = *members_[l];
    innovation_sum_[l] += dy - m.model().output(m.estimate()) * dt_;
    m.step(dy, omega);
  }
  if (++window_fill_ == cadence_) {
    const double window = static_cast<double>(cadence_) * dt_;
    for (std::size_t l = 0; l < members_.size(); ++l) {
      const double s = innovation_sum_[l];
      last_w_[l] = s * s / (members_[l]->model().sigma_v2() * window);
      innovation_sum_[l] = 0.0;
    }
    weights_ = mmae_update_weights(weights_, beta_, last_w_, floor_);
    window_fill_ = 0;
    ++updates_;
  }
  std::vector<CoherenceVector> xs;
  xs.reserve(members_.size());
  for (const auto& m : members_) xs.push_back(m->estimate());
  // Convexity keeps the mixture inside the ball; the projection only absorbs rounding.
  combined_ = bloch_project(mmae_combine(weights_, xs));
}

FilterOutput MultipleModelEstimator::output() const {
  return {combined_, from_coherence(combined_), weights_, std::nullopt};
}

const QubitModel& MultipleModelEstimator::model() const {
  const auto best = std::max_element(weights_.begin(), weights_.end()) - weights_.begin();
  return members_[static_cast<std::size_t>(best)]->model();
}

std::size_t MultipleModelEstimator::clamp_count() const {
  std::size_t total = 0;
  for (const auto& m : members_) total += m->clamp_count();
  return total;
}

}  // namespace qmon
