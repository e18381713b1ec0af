// qmon: run monitored-qubit ensembles from the command line.
//
// Exit status: 0 every trajectory succeeded, 1 at least one trajectory
// failed (or output could not be written), 2 invalid configuration.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qmon/config.hpp"
#include "qmon/ensemble.hpp"
#include "qmon/error.hpp"
#include "qmon/recipes.hpp"

namespace {

using nlohmann::json;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> realizations;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  std::optional<double> eta, sigma_z2, gamma, measurement_strength, omega_r;
  std::optional<double> dt, horizon;
  std::optional<int> substeps;
  std::optional<std::string> estimator, controller;
  std::optional<double> omega, alpha, epsilon, omega_max;
  bool paper_literal_qw = false;
  bool paper_literal_g = false;
  bool no_trajectories = false;
  bool references = false;
  bool dump_config = false;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON config overlaid on the subcommand defaults")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--realizations", o.realizations, "number of trajectories");
  app->add_option("--out", o.out, "output directory (no files are written without it)");
  app->add_option("--workers", o.workers, "concurrent trajectories");
  app->add_option("--eta", o.eta, "detector efficiency");
  app->add_option("--sigma-z2", o.sigma_z2, "spectrum-analyzer noise variance");
  app->add_option("--gamma", o.gamma, "decay rate");
  app->add_option("--measurement-strength", o.measurement_strength, "measurement rate M");
  app->add_option("--omega-r", o.omega_r, "drift frequency (sets H_d = omega_r/2 sigma_3)");
  app->add_option("--dt", o.dt, "sampling interval");
  app->add_option("--horizon", o.horizon, "final time T");
  app->add_option("--substeps", o.substeps, "truth sub-steps per dt");
  app->add_option("--estimator", o.estimator, "none | qf | ekf | mmae-qf | mmae-ekf");
  app->add_option("--controller", o.controller, "off | constant | lyapunov-true-state | lyapunov-estimated");
  app->add_option("--omega", o.omega, "constant drive");
  app->add_option("--alpha", o.alpha, "Lyapunov decay rate");
  app->add_option("--epsilon", o.epsilon, "switching threshold");
  app->add_option("--omega-max", o.omega_max, "control saturation");
  app->add_flag("--paper-literal-qw", o.paper_literal_qw, "EKF process noise variance 1 + sigma_bar");
  app->add_flag("--paper-literal-G", o.paper_literal_g, "EKF process noise shaped by dg/dx");
  app->add_flag("--no-trajectories", o.no_trajectories, "write only the ensemble and meta files");
  app->add_flag("--references", o.references, "also write noise-free reference series");
  app->add_flag("--dump-config", o.dump_config, "print the resolved config and exit");
}

json overrides_json(const Overrides& o) {
  json j = json::object();
  auto put = [](json& dst, const char* key, const auto& v) {
    if (v) dst[key] = *v;
  };
  json model = json::object(), noise = json::object(), est = json::object(), ctl = json::object();
  put(model, "efficiency", o.eta);
  put(model, "sigma_z2", o.sigma_z2);
  put(model, "gamma", o.gamma);
  put(model, "measurement_strength", o.measurement_strength);
  put(model, "omega_r", o.omega_r);
  put(noise, "seed", o.seed);
  put(noise, "dt", o.dt);
  put(noise, "horizon", o.horizon);
  put(noise, "substeps", o.substeps);
  put(est, "type", o.estimator);
  if (o.paper_literal_qw) est["paper_literal_qw"] = true;
  if (o.paper_literal_g) est["paper_literal_G"] = true;
  put(ctl, "type", o.controller);
  put(ctl, "omega", o.omega);
  put(ctl, "alpha", o.alpha);
  put(ctl, "epsilon", o.epsilon);
  put(ctl, "omega_max", o.omega_max);
  if (!model.empty()) j["model"] = model;
  if (!noise.empty()) j["noise"] = noise;
  if (!est.empty()) j["estimator"] = est;
  if (!ctl.empty()) j["controller"] = ctl;
  put(j, "realizations", o.realizations);
  put(j, "workers", o.workers);
  put(j, "output", o.out);
  if (o.no_trajectories) j["write_trajectories"] = false;
  if (o.references) j["references"] = true;
  return j;
}

void print_summary(const qmon::ExperimentConfig& cfg, const qmon::EnsembleResult& r) {
  std::cout << "experiment " << cfg.name << "  hash " << qmon::config_hash(cfg) << "  seed " << cfg.noise.seed
            << '\n';
  std::cout << "trajectories " << r.completed << '/' << cfg.realizations << " completed";
  if (!r.failures.empty()) std::cout << ", " << r.failures.size() << " failed";
  std::cout << '\n';
  for (const auto& f : r.failures) std::cout << "  trajectory " << f.index << ": " << f.message << '\n';
  if (r.stats.rows.empty()) return;
  const auto& last = r.stats.rows.back();
  std::cout << "at t = " << last[0] << ":\n";
  for (std::size_t c = 1; c < r.stats.columns.size(); c += 3) {
    const std::string& name = r.stats.columns[c];
    const std::string series = name.substr(0, name.size() - 5);  // strip _mean
    if (series.rfind("rho", 0) == 0) continue;
    char line[128];
    std::snprintf(line, sizeof line, "  %-24s %12.6f +- %.6f\n", series.c_str(), last[c], last[c + 2]);
    std::cout << line;
  }
  if (!cfg.output.empty()) std::cout << "wrote " << cfg.output << '\n';
}

bool allowed_estimator(const std::string& sub, qmon::EstimatorKind k) {
  using qmon::EstimatorKind;
  if (sub == "filter") return k == EstimatorKind::kQuantumFilter || k == EstimatorKind::kEkf;
  if (sub == "mmae") return qmon::is_mmae(k);
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monitored-qubit simulation, estimation and feedback control"};
  app.set_version_flag("--version", std::string(QMON_CLI_VERSION));
  app.require_subcommand(1);

  Overrides o;
  std::string recipe_name;
  bool list = false;

  CLI::App* simulate = app.add_subcommand("simulate", "open-loop trajectories of the monitored qubit");
  CLI::App* filter = app.add_subcommand("filter", "truth plus a quantum filter or EKF (default ekf)");
  CLI::App* mmae = app.add_subcommand("mmae", "truth plus a five-model adaptive bank (default mmae-ekf)");
  CLI::App* control = app.add_subcommand("control", "closed loop with the switching Lyapunov controller");
  CLI::App* recipe = app.add_subcommand("recipe", "run a built-in experiment");
  recipe->add_option("name", recipe_name, "recipe name");
  recipe->add_flag("--list", list, "list recipe names");
  for (CLI::App* sub : {simulate, filter, mmae, control, recipe}) add_common(sub, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string which = sub->get_name();

  qmon::ExperimentConfig cfg;
  try {
    if (which == "recipe") {
      if (list) {
        for (const auto& n : qmon::recipe_names()) std::cout << n << '\n';
        return 0;
      }
      if (recipe_name.empty()) throw qmon::ConfigError("recipe needs a name; try 'recipe --list'");
      cfg = qmon::built_in_recipe(recipe_name);
    } else if (which == "simulate") {
      cfg = qmon::built_in_recipe("fig2-dynamics");
      cfg.name = "simulate";
      cfg.references = false;
    } else if (which == "filter") {
      cfg = qmon::built_in_recipe("fig3-5-filters");
      cfg.name = "filter";
    } else if (which == "mmae") {
      cfg = qmon::built_in_recipe("fig7-8-mmae");
      cfg.name = "mmae";
    } else {
      cfg = qmon::built_in_recipe("fig9-control");
      cfg.name = "control";
    }
    if (!o.config.empty()) cfg = qmon::load_config(o.config, cfg);
    qmon::apply_json(cfg, overrides_json(o));
    if (!allowed_estimator(which, cfg.estimator.kind)) {
      throw qmon::ConfigError("estimator '" + std::string(qmon::to_string(cfg.estimator.kind)) +
                              "' does not fit the '" + which + "' subcommand");
    }
    if (which == "control" && !qmon::is_lyapunov(cfg.controller.kind)) {
      throw qmon::ConfigError("the control subcommand needs a lyapunov controller");
    }
    cfg.validate();
  } catch (const qmon::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  if (o.dump_config) {
    std::cout << qmon::to_json(cfg).dump(2) << '\n';
    return 0;
  }

  try {
    const qmon::EnsembleResult result = qmon::run_experiment(cfg);
    print_summary(cfg, result);
    return result.failures.empty() ? 0 : 1;
  } catch (const qmon::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
