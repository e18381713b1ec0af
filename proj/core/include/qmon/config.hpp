#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmon/control.hpp"
#include "qmon/dynamics.hpp"
#include "qmon/estimators.hpp"

namespace qmon {

enum class EstimatorKind { kNone, kQuantumFilter, kEkf, kMmaeQuantumFilter, kMmaeEkf };
enum class ControllerKind { kOff, kConstant, kLyapunovTrueState, kLyapunovEstimated };

std::string_view to_string(EstimatorKind k);
std::string_view to_string(ControllerKind k);
EstimatorKind parse_estimator_kind(std::string_view s);
ControllerKind parse_controller_kind(std::string_view s);

bool is_mmae(EstimatorKind k);
bool is_lyapunov(ControllerKind k);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::kNone;
  CoherenceVector initial_estimate{1.0, 0.0, 0.0};
  Mat3 p0 = Mat3::Identity();
  EkfOptions ekf;
  std::vector<double> multipliers{0.8, 0.9, 1.0, 1.1, 1.2};
  std::vector<double> beta;  ///< empty: all ones
  int cadence = 10;
  double weight_floor = 0.0;
};

struct ControllerConfig {
  ControllerKind kind = ControllerKind::kOff;
  double omega = 0.0;  ///< constant drive [rad/s]
  double alpha = ControllerParams{}.alpha;
  double epsilon = ControllerParams{}.epsilon;
  std::optional<double> epsilon_on;
  std::optional<double> dwell_active;  ///< default 10 dt
  std::optional<double> dwell_idle;    ///< default 10 dt
  std::optional<double> omega_max;     ///< default 10 Gamma
  CoherenceVector target{0.0, 0.0, 1.0};
};

struct ExperimentConfig {
  std::string name = "experiment";
  ModelParams model;
  NoiseSpec noise;
  CoherenceVector initial_state{0.0, 1.0, 0.0};
  EstimatorConfig estimator;
  ControllerConfig controller;
  std::size_t realizations = 100;
  unsigned workers = 1;
  std::string output;  ///< output directory; empty disables file output
  bool write_trajectories = true;
  bool references = false;  ///< also write noise-free Lindblad and unitary series

  /// Full consistency check; throws ConfigError.
  void validate() const;
  ControllerParams controller_params() const;
  TargetSpec target() const;
};

/// Overlay `j` onto `cfg`. Only present keys change; unknown keys and type
/// mismatches throw ConfigError.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Reads a JSON document from disk and overlays it onto `base`.
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// FNV-1a 64 of the canonical JSON of the experiment (execution-only keys
/// such as workers and output are excluded), as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);
nlohmann::json experiment_json(const ExperimentConfig& cfg);

}  // namespace qmon
