#include "qmon/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include "qmon/control.hpp"
#include "qmon/error.hpp"

#ifndef QMON_VERSION
#define QMON_VERSION "0.0.0"
#endif

namespace qmon {
namespace {

bool has_estimator(const ExperimentConfig& cfg) { return cfg.estimator.kind != EstimatorKind::kNone; }
bool has_trace_p(const ExperimentConfig& cfg) { return cfg.estimator.kind == EstimatorKind::kEkf; }

std::vector<ModelParams> bank_models(const ExperimentConfig& cfg) {
  std::vector<ModelParams> models;
  for (double m : cfg.estimator.multipliers) models.push_back(cfg.model.with_drift_scaled(m));
  return models;
}

// Drives the observer from the measurement record and computes the control
// at each grid time, recording one row per grid time.
class Pipeline final : public ControlPolicy {
 public:
  Pipeline(const ExperimentConfig& cfg, std::size_t steps)
      : cfg_(cfg), observer_(make_observer(cfg)), columns_(trajectory_columns(cfg).size()) {
    if (is_lyapunov(cfg.controller.kind)) {
      target_.emplace(cfg.target());
      controller_.emplace(*target_, cfg.model, cfg.controller_params(), 0.0);
    }
    rows_.reserve(steps + 1);
  }

  double control(std::size_t, double t, const CoherenceVector& x) override {
    const DensityMatrix rho = from_coherence(x);
    std::optional<FilterOutput> est;
    if (observer_) est = observer_->output();

    double omega = 0.0;
    switch (cfg_.controller.kind) {
      case ControllerKind::kOff: break;
      case ControllerKind::kConstant: omega = cfg_.controller.omega; break;
      case ControllerKind::kLyapunovTrueState: omega = controller_->update(t, rho); break;
      case ControllerKind::kLyapunovEstimated: omega = controller_->update(t, est->rho); break;
    }

    std::vector<double> row;
    row.reserve(columns_);
    row.insert(row.end(), {t, x(0), x(1), x(2)});
    if (est) row.insert(row.end(), {est->x(0), est->x(1), est->x(2)});
    const CMat2& m = rho.matrix();
    row.insert(row.end(), {m(0, 0).real(), m(0, 1).real(), m(0, 1).imag(), m(1, 1).real()});
    if (est) row.push_back(fidelity(rho, est->rho));
    if (target_) {
      row.push_back(fidelity(rho, target_->rho_f));
      row.push_back(lyapunov_V(rho, *target_));
    }
    row.push_back(omega);
    if (has_trace_p(cfg_)) row.push_back(est->trace_p.value_or(0.0));
    if (is_mmae(cfg_.estimator.kind)) row.insert(row.end(), est->weights.begin(), est->weights.end());
    rows_.push_back(std::move(row));
    return omega;
  }

  void observe(std::size_t, double dy, double omega) override {
    if (observer_) observer_->step(dy, omega);
  }

  std::vector<std::vector<double>> take_rows() { return std::move(rows_); }
  const Observer* observer() const { return observer_.get(); }
  const LyapunovController* controller() const { return controller_ ? &*controller_ : nullptr; }

 private:
  const ExperimentConfig& cfg_;
  std::unique_ptr<Observer> observer_;
  std::optional<TargetSpec> target_;
  std::optional<LyapunovController> controller_;
  std::size_t columns_;
  std::vector<std::vector<double>> rows_;
};

std::string trajectory_filename(std::uint64_t i) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "trajectory_%04llu.csv", static_cast<unsigned long long>(i));
  return buf;
}

}  // namespace

std::unique_ptr<Observer> make_observer(const ExperimentConfig& cfg) {
  const EstimatorConfig& e = cfg.estimator;
  const double dt = cfg.noise.dt;
  switch (e.kind) {
    case EstimatorKind::kNone: return nullptr;
    case EstimatorKind::kQuantumFilter: return std::make_unique<QuantumFilter>(cfg.model, dt, e.initial_estimate);
    case EstimatorKind::kEkf:
      return std::make_unique<ExtendedKalmanFilter>(cfg.model, dt, e.initial_estimate, e.p0, e.ekf);
    case EstimatorKind::kMmaeQuantumFilter:
    case EstimatorKind::kMmaeEkf: {
      MmaeOptions opts;
      opts.members = e.kind == EstimatorKind::kMmaeEkf ? MemberKind::kEkf : MemberKind::kQuantumFilter;
      opts.beta = e.beta;
      opts.cadence = e.cadence;
      opts.weight_floor = e.weight_floor;
      opts.ekf = e.ekf;
      opts.p0 = e.p0;
      return std::make_unique<MultipleModelEstimator>(bank_models(cfg), dt, e.initial_estimate, opts);
    }
  }
  return nullptr;
}

std::vector<std::string> trajectory_columns(const ExperimentConfig& cfg) {
  std::vector<std::string> c{"t", "x1", "x2", "x3"};
  if (has_estimator(cfg)) c.insert(c.end(), {"xhat1", "xhat2", "xhat3"});
  c.insert(c.end(), {"rho00_re", "rho01_re", "rho01_im", "rho11_re"});
  if (has_estimator(cfg)) c.push_back("fidelity_truth_estimate");
  if (is_lyapunov(cfg.controller.kind)) c.insert(c.end(), {"fidelity_truth_target", "V"});
  c.push_back("Omega");
  if (has_trace_p(cfg)) c.push_back("traceP");
  if (is_mmae(cfg.estimator.kind)) {
    for (std::size_t l = 0; l < cfg.estimator.multipliers.size(); ++l) c.push_back("p" + std::to_string(l + 1));
  }
  return c;
}

TrajectoryResult run_trajectory(const ExperimentConfig& cfg, std::uint64_t index) {
  Pipeline pipeline(cfg, cfg.noise.steps());
  const TrajectoryRecord rec = simulate_trajectory(cfg.model, cfg.noise, cfg.initial_state, &pipeline, index);

  TrajectoryResult out;
  out.index = index;
  out.table.columns = trajectory_columns(cfg);
  out.table.rows = pipeline.take_rows();
  for (const auto& row : out.table.rows) {
    for (double v : row) {
      if (!std::isfinite(v)) throw NumericalError("non-finite value in trajectory " + std::to_string(index));
    }
  }
  out.projection_count = rec.projection_count;
  if (const Observer* o = pipeline.observer()) out.estimator_clamps = o->clamp_count();
  if (const LyapunovController* c = pipeline.controller()) {
    out.switch_times = c->switch_times();
    out.singular_steps = c->singular_count();
  }
  return out;
}

Table ensemble_stats(const std::vector<const Table*>& tables) {
  Table stats;
  if (tables.empty()) return stats;
  const Table& first = *tables.front();
  stats.columns.push_back("t");
  for (std::size_t c = 1; c < first.columns.size(); ++c) {
    for (const char* suffix : {"_mean", "_std", "_se"}) stats.columns.push_back(first.columns[c] + suffix);
  }
  const double n = static_cast<double>(tables.size());
  for (std::size_t r = 0; r < first.rows.size(); ++r) {
    std::vector<double> row{first.rows[r][0]};
    for (std::size_t c = 1; c < first.columns.size(); ++c) {
      double sum = 0.0;
      for (const Table* t : tables) sum += t->rows[r][c];
      const double mean = sum / n;
      double ss = 0.0;
      for (const Table* t : tables) ss += (t->rows[r][c] - mean) * (t->rows[r][c] - mean);
      const double sd = tables.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      row.insert(row.end(), {mean, sd, sd / std::sqrt(n)});
    }
    stats.rows.push_back(std::move(row));
  }
  return stats;
}

Table reference_table(const ExperimentConfig& cfg, bool unitary) {
  ModelParams p = cfg.model;
  if (unitary) {
    p.gamma = 0.0;
    p.measurement_strength = 0.0;
  }
  const double omega = cfg.controller.kind == ControllerKind::kConstant ? cfg.controller.omega : 0.0;
  const DeterministicTrajectory ref = lindblad_reference(p, omega, cfg.initial_state, cfg.noise.dt, cfg.noise.horizon);
  Table t;
  t.columns = {"t", "x1", "x2", "x3"};
  for (std::size_t i = 0; i < ref.t.size(); ++i) t.rows.push_back({ref.t[i], ref.x[i](0), ref.x[i](1), ref.x[i](2)});
  return t;
}

nlohmann::json meta_json(const ExperimentConfig& cfg, const EnsembleResult& result) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : result.failures) failures.push_back({{"trajectory", f.index}, {"message", f.message}});
  return {{"config", experiment_json(cfg)},
          {"config_hash", config_hash(cfg)},
          {"master_seed", cfg.noise.seed},
          {"version", QMON_VERSION},
          {"realizations", cfg.realizations},
          {"completed", result.completed},
          {"failures", failures},
          {"projection_count", result.projection_count},
          {"estimator_clamp_count", result.estimator_clamps},
          {"max_switches", result.max_switches}};
}

EnsembleResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  namespace fs = std::filesystem;
  const bool write = !cfg.output.empty();
  if (write) {
    std::error_code ec;
    fs::create_directories(cfg.output, ec);
    if (ec) throw Error("cannot create output directory '" + cfg.output + "': " + ec.message());
  }

  const std::size_t n = cfg.realizations;
  std::vector<std::optional<TrajectoryResult>> slots(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  std::mutex io_error_mutex;
  std::string io_error;

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        TrajectoryResult r = run_trajectory(cfg, i);
        if (write && cfg.write_trajectories) write_csv(r.table, (fs::path(cfg.output) / trajectory_filename(i)).string());
        slots[i] = std::move(r);
      } catch (const NumericalError& e) {
        errors[i] = e.what();
      } catch (const Error& e) {
        std::lock_guard lock(io_error_mutex);
        if (io_error.empty()) io_error = e.what();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(n)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (!io_error.empty()) throw Error(io_error);

  EnsembleResult result;
  std::vector<const Table*> tables;
  for (std::size_t i = 0; i < n; ++i) {
    if (!slots[i]) {
      result.failures.push_back({i, errors[i]});
      continue;
    }
    const TrajectoryResult& r = *slots[i];
    tables.push_back(&r.table);
    ++result.completed;
    result.projection_count += r.projection_count;
    result.estimator_clamps += r.estimator_clamps;
    result.max_switches = std::max(result.max_switches, r.switch_times.size());
  }
  result.stats = ensemble_stats(tables);
  if (result.stats.columns.empty()) result.stats.columns = {"t"};

  if (write) {
    const fs::path dir(cfg.output);
    write_csv(result.stats, (dir / "_ensemble.csv").string());
    if (cfg.references) {
      write_csv(reference_table(cfg, false), (dir / "_lindblad.csv").string());
      write_csv(reference_table(cfg, true), (dir / "_unitary.csv").string());
    }
    // Reloadable with --config; execution-only keys are left out so the file
    // does not depend on the worker count.
    std::ofstream conf(dir / "_config.json", std::ios::binary | std::ios::trunc);
    if (!conf) throw Error("cannot write config document in '" + cfg.output + "'");
    conf << experiment_json(cfg).dump(2) << '\n';
    std::ofstream meta(dir / "_meta.json", std::ios::binary | std::ios::trunc);
    if (!meta) throw Error("cannot write meta document in '" + cfg.output + "'");
    meta << meta_json(cfg, result).dump(2) << '\n';
  }

  if (opts.keep_trajectories) {
    for (auto& s : slots) {
      if (s) result.trajectories.push_back(std::move(*s));
    }
  }
  return result;
}

}  // namespace qmon
