// Seeded Monte Carlo ensembles: per-trajectory series, ordered statistics
// and the on-disk artifacts of a run.
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmon/config.hpp"
#include "qmon/csv.hpp"
#include "qmon/estimators.hpp"

namespace qmon {

/// Observer selected by the config, or null for EstimatorKind::kNone.
std::unique_ptr<Observer> make_observer(const ExperimentConfig& cfg);

/// Column layout of a trajectory file for this config.
std::vector<std::string> trajectory_columns(const ExperimentConfig& cfg);

struct TrajectoryResult {
  std::uint64_t index = 0;
  Table table;
  std::size_t projection_count = 0;   ///< clamped truth sub-steps
  std::size_t estimator_clamps = 0;
  std::vector<double> switch_times;   ///< Lyapunov controllers only
  std::size_t singular_steps = 0;
};

/// Simulates truth, estimator and controller for one realization.
/// Throws NumericalError on a numerical blowup.
TrajectoryResult run_trajectory(const ExperimentConfig& cfg, std::uint64_t index);

struct TrajectoryFailure {
  std::uint64_t index = 0;
  std::string message;
};

struct EnsembleResult {
  /// t followed by <column>_mean, <column>_std, <column>_se per series.
  Table stats;
  std::vector<TrajectoryResult> trajectories;  ///< only with keep_trajectories
  std::vector<TrajectoryFailure> failures;
  std::size_t completed = 0;
  std::size_t projection_count = 0;
  std::size_t estimator_clamps = 0;
  std::size_t max_switches = 0;
};

struct RunOptions {
  bool keep_trajectories = false;
};

/// Ordered fold of per-trajectory tables into mean, sample standard
/// deviation and standard error per grid time.
Table ensemble_stats(const std::vector<const Table*>& tables);

/// Runs cfg.realizations trajectories on cfg.workers threads. Failed
/// trajectories are recorded and skipped. When cfg.output is set, writes
/// trajectory_NNNN.csv, _ensemble.csv, _meta.json and, with references,
/// _lindblad.csv and _unitary.csv.
EnsembleResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Noise-free series (t, x1, x2, x3) for the configured drive: the Lindblad
/// solution and, with unitary = true, the non-dissipative one (Gamma = M = 0).
Table reference_table(const ExperimentConfig& cfg, bool unitary);

nlohmann::json meta_json(const ExperimentConfig& cfg, const EnsembleResult& result);

}  // namespace qmon
