#include "qmon/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>

#include <Eigen/Eigenvalues>

#include "qmon/error.hpp"

namespace qmon {
namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, std::string_view where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + "." + key + ": " + e.what());
  }
}

double read_number(const json& v, std::string_view where) {
  if (!v.is_number()) throw ConfigError(std::string(where) + " must be a number");
  return v.get<double>();
}

Vec3 read_vec3(const json& v, std::string_view where) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(std::string(where) + " must be an array of 3 numbers");
  return {read_number(v[0], where), read_number(v[1], where), read_number(v[2], where)};
}

Complex read_complex(const json& v, std::string_view where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2) return {read_number(v[0], where), read_number(v[1], where)};
  throw ConfigError(std::string(where) + " entries must be numbers or [re, im] pairs");
}

CMat2 read_cmat2(const json& v, std::string_view where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_array() || v[0].size() != 2 || !v[1].is_array() ||
      v[1].size() != 2) {
    throw ConfigError(std::string(where) + " must be a 2x2 array");
  }
  CMat2 m;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) m(r, c) = read_complex(v[r][c], where);
  return m;
}

Mat3 read_p0(const json& v, std::string_view where) {
  if (v.is_number()) return v.get<double>() * Mat3::Identity();
  if (!v.is_array() || v.size() != 3) throw ConfigError(std::string(where) + " must be a scalar or 3x3 array");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const Vec3 row = read_vec3(v[r], where);
    m.row(r) = row.transpose();
  }
  return m;
}

std::vector<double> read_doubles(const json& v, std::string_view where) {
  if (!v.is_array()) throw ConfigError(std::string(where) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(read_number(e, where));
  return out;
}

json vec3_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

json cmat2_json(const CMat2& m) {
  json out = json::array();
  for (int r = 0; r < 2; ++r) {
    json row = json::array();
    for (int c = 0; c < 2; ++c) row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    out.push_back(row);
  }
  return out;
}

json mat3_json(const Mat3& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) out.push_back(vec3_json(m.row(r).transpose()));
  return out;
}

void apply_model(ModelParams& m, const json& j) {
  check_keys(j, {"gamma", "measurement_strength", "efficiency", "sigma_z2", "omega_r", "H_d", "H_c", "c_d", "c_m"},
             "model");
  read(j, "gamma", m.gamma, "model");
  read(j, "measurement_strength", m.measurement_strength, "model");
  read(j, "efficiency", m.efficiency, "model");
  read(j, "sigma_z2", m.sigma_z2, "model");
  if (j.contains("omega_r")) {
    m.omega_r = read_number(j["omega_r"], "model.omega_r");
    if (!j.contains("H_d")) m.h_drift = 0.5 * m.omega_r * pauli(3);
  }
  if (j.contains("H_d")) m.h_drift = read_cmat2(j["H_d"], "model.H_d");
  if (j.contains("H_c")) m.h_control = read_cmat2(j["H_c"], "model.H_c");
  if (j.contains("c_d")) m.c_decay = read_cmat2(j["c_d"], "model.c_d");
  if (j.contains("c_m")) m.c_meas = read_cmat2(j["c_m"], "model.c_m");
}

void apply_noise(NoiseSpec& n, const json& j) {
  check_keys(j, {"seed", "dt", "horizon", "substeps"}, "noise");
  read(j, "seed", n.seed, "noise");
  read(j, "dt", n.dt, "noise");
  read(j, "horizon", n.horizon, "noise");
  read(j, "substeps", n.substeps, "noise");
}

void apply_estimator(EstimatorConfig& e, const json& j) {
  check_keys(j, {"type", "initial_estimate", "P0", "paper_literal_qw", "paper_literal_G", "multipliers", "beta",
                 "cadence", "weight_floor"},
             "estimator");
  if (j.contains("type")) {
    std::string s;
    read(j, "type", s, "estimator");
    e.kind = parse_estimator_kind(s);
  }
  if (j.contains("initial_estimate")) e.initial_estimate = read_vec3(j["initial_estimate"], "estimator.initial_estimate");
  if (j.contains("P0")) e.p0 = read_p0(j["P0"], "estimator.P0");
  read(j, "paper_literal_qw", e.ekf.paper_literal_qw, "estimator");
  read(j, "paper_literal_G", e.ekf.paper_literal_g, "estimator");
  if (j.contains("multipliers")) e.multipliers = read_doubles(j["multipliers"], "estimator.multipliers");
  if (j.contains("beta")) e.beta = read_doubles(j["beta"], "estimator.beta");
  read(j, "cadence", e.cadence, "estimator");
  read(j, "weight_floor", e.weight_floor, "estimator");
}

void apply_controller(ControllerConfig& c, const json& j) {
  check_keys(j, {"type", "omega", "alpha", "epsilon", "epsilon_on", "dwell_active", "dwell_idle", "omega_max",
                 "target"},
             "controller");
  if (j.contains("type")) {
    std::string s;
    read(j, "type", s, "controller");
    c.kind = parse_controller_kind(s);
  }
  read(j, "omega", c.omega, "controller");
  read(j, "alpha", c.alpha, "controller");
  read(j, "epsilon", c.epsilon, "controller");
  auto read_opt = [&](const char* key, std::optional<double>& out) {
    if (!j.contains(key)) return;
    if (j[key].is_null()) {
      out.reset();
    } else {
      out = read_number(j[key], std::string("controller.") + key);
    }
  };
  read_opt("epsilon_on", c.epsilon_on);
  read_opt("dwell_active", c.dwell_active);
  read_opt("dwell_idle", c.dwell_idle);
  read_opt("omega_max", c.omega_max);
  if (j.contains("target")) c.target = read_vec3(j["target"], "controller.target");
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool in_ball(const Vec3& x) { return x.allFinite() && x.norm() <= 1.0 + kBallSlack; }

}  // namespace

std::string_view to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::kNone: return "none";
    case EstimatorKind::kQuantumFilter: return "qf";
    case EstimatorKind::kEkf: return "ekf";
    case EstimatorKind::kMmaeQuantumFilter: return "mmae-qf";
    case EstimatorKind::kMmaeEkf: return "mmae-ekf";
  }
  return "none";
}

std::string_view to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::kOff: return "off";
    case ControllerKind::kConstant: return "constant";
    case ControllerKind::kLyapunovTrueState: return "lyapunov-true-state";
    case ControllerKind::kLyapunovEstimated: return "lyapunov-estimated";
  }
  return "off";
}

EstimatorKind parse_estimator_kind(std::string_view s) {
  for (auto k : {EstimatorKind::kNone, EstimatorKind::kQuantumFilter, EstimatorKind::kEkf,
                 EstimatorKind::kMmaeQuantumFilter, EstimatorKind::kMmaeEkf}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown estimator '" + std::string(s) + "' (expected none, qf, ekf, mmae-qf, mmae-ekf)");
}

ControllerKind parse_controller_kind(std::string_view s) {
  for (auto k : {ControllerKind::kOff, ControllerKind::kConstant, ControllerKind::kLyapunovTrueState,
                 ControllerKind::kLyapunovEstimated}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown controller '" + std::string(s) +
                    "' (expected off, constant, lyapunov-true-state, lyapunov-estimated)");
}

bool is_mmae(EstimatorKind k) { return k == EstimatorKind::kMmaeEkf || k == EstimatorKind::kMmaeQuantumFilter; }

bool is_lyapunov(ControllerKind k) {
  return k == ControllerKind::kLyapunovTrueState || k == ControllerKind::kLyapunovEstimated;
}

ControllerParams ExperimentConfig::controller_params() const {
  ControllerParams cp = ControllerParams::defaults_for(model, noise.dt);
  cp.alpha = controller.alpha;
  cp.epsilon = controller.epsilon;
  cp.epsilon_on = controller.epsilon_on;
  if (controller.dwell_active) cp.dwell_active = *controller.dwell_active;
  if (controller.dwell_idle) cp.dwell_idle = *controller.dwell_idle;
  if (controller.omega_max) cp.omega_max = *controller.omega_max;
  return cp;
}

TargetSpec ExperimentConfig::target() const {
  return TargetSpec::make(from_coherence(controller.target), model);
}

void ExperimentConfig::validate() const {
  model.validate();
  noise.validate();
  require(in_ball(initial_state), "initial_state must lie in the Bloch ball");
  require(realizations >= 1, "realizations must be >= 1");
  require(workers >= 1, "workers must be >= 1");

  const EstimatorConfig& e = estimator;
  if (e.kind != EstimatorKind::kNone) {
    require(in_ball(e.initial_estimate), "estimator.initial_estimate must lie in the Bloch ball");
    require(e.p0.allFinite() && (e.p0 - e.p0.transpose()).cwiseAbs().maxCoeff() < 1e-12,
            "estimator.P0 must be finite and symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> es(e.p0);
    require(es.eigenvalues().minCoeff() >= -1e-12, "estimator.P0 must be positive semidefinite");
  }
  if (is_mmae(e.kind)) {
    require(!e.multipliers.empty(), "estimator.multipliers must not be empty");
    for (double m : e.multipliers) require(std::isfinite(m) && m > 0.0, "estimator.multipliers must be positive");
    require(e.beta.empty() || e.beta.size() == e.multipliers.size(),
            "estimator.beta must have one entry per multiplier");
    for (double b : e.beta) require(std::isfinite(b) && b > 0.0, "estimator.beta entries must be positive");
    require(e.cadence >= 1, "estimator.cadence must be >= 1");
    require(e.weight_floor >= 0.0 && e.weight_floor * static_cast<double>(e.multipliers.size()) < 1.0,
            "estimator.weight_floor must satisfy 0 <= floor < 1/N");
  }

  const ControllerConfig& c = controller;
  require(std::isfinite(c.omega), "controller.omega must be finite");
  if (is_lyapunov(c.kind)) {
    controller_params().validate();
    require(in_ball(c.target), "controller.target must lie in the Bloch ball");
    (void)target();
  }
  if (c.kind == ControllerKind::kLyapunovEstimated) {
    require(e.kind != EstimatorKind::kNone, "lyapunov-estimated control needs an estimator");
  }
}

void apply_json(ExperimentConfig& cfg, const json& j) {
  check_keys(j, {"name", "model", "noise", "initial_state", "estimator", "controller", "realizations", "workers",
                 "output", "write_trajectories", "references"},
             "config");
  read(j, "name", cfg.name, "config");
  if (j.contains("model")) apply_model(cfg.model, j["model"]);
  if (j.contains("noise")) apply_noise(cfg.noise, j["noise"]);
  if (j.contains("initial_state")) cfg.initial_state = read_vec3(j["initial_state"], "initial_state");
  if (j.contains("estimator")) apply_estimator(cfg.estimator, j["estimator"]);
  if (j.contains("controller")) apply_controller(cfg.controller, j["controller"]);
  read(j, "realizations", cfg.realizations, "config");
  read(j, "workers", cfg.workers, "config");
  read(j, "output", cfg.output, "config");
  read(j, "write_trajectories", cfg.write_trajectories, "config");
  read(j, "references", cfg.references, "config");
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  const ModelParams& m = cfg.model;
  const EstimatorConfig& e = cfg.estimator;
  const ControllerConfig& c = cfg.controller;
  json j;
  j["name"] = cfg.name;
  j["model"] = {{"gamma", m.gamma},
                {"measurement_strength", m.measurement_strength},
                {"efficiency", m.efficiency},
                {"sigma_z2", m.sigma_z2},
                {"omega_r", m.omega_r},
                {"H_d", cmat2_json(m.h_drift)},
                {"H_c", cmat2_json(m.h_control)},
                {"c_d", cmat2_json(m.c_decay)},
                {"c_m", cmat2_json(m.c_meas)}};
  j["noise"] = {{"seed", cfg.noise.seed},
                {"dt", cfg.noise.dt},
                {"horizon", cfg.noise.horizon},
                {"substeps", cfg.noise.substeps}};
  j["initial_state"] = vec3_json(cfg.initial_state);
  j["estimator"] = {{"type", std::string(to_string(e.kind))},
                    {"initial_estimate", vec3_json(e.initial_estimate)},
                    {"P0", mat3_json(e.p0)},
                    {"paper_literal_qw", e.ekf.paper_literal_qw},
                    {"paper_literal_G", e.ekf.paper_literal_g},
                    {"multipliers", e.multipliers},
                    {"beta", e.beta},
                    {"cadence", e.cadence},
                    {"weight_floor", e.weight_floor}};
  j["controller"] = {{"type", std::string(to_string(c.kind))},
                     {"omega", c.omega},
                     {"alpha", c.alpha},
                     {"epsilon", c.epsilon},
                     {"epsilon_on", optional_json(c.epsilon_on)},
                     {"dwell_active", optional_json(c.dwell_active)},
                     {"dwell_idle", optional_json(c.dwell_idle)},
                     {"omega_max", optional_json(c.omega_max)},
                     {"target", vec3_json(c.target)}};
  j["realizations"] = cfg.realizations;
  j["workers"] = cfg.workers;
  j["output"] = cfg.output;
  j["write_trajectories"] = cfg.write_trajectories;
  j["references"] = cfg.references;
  return j;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  apply_json(base, j);
  return base;
}

json experiment_json(const ExperimentConfig& cfg) {
  json j = to_json(cfg);
  j.erase("workers");
  j.erase("output");
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = experiment_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qmon
