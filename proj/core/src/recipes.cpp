#include "qmon/recipes.hpp"

#include "qmon/error.hpp"

namespace qmon {

ExperimentConfig base_recipe() {
  constexpr double kGamma = 10.0;
  ExperimentConfig cfg;
  cfg.model = ModelParams::leaky_cavity(kGamma, 1.0, 0.8, 5.0 * kGamma, 0.1);
  cfg.noise.seed = 1;
  cfg.noise.dt = 1e-3;
  cfg.noise.horizon = 1.0;
  // Fine sub-steps for the true state keep its weak error below the
  // ensemble standard error; the filters still see one sample per dt.
  cfg.noise.substeps = 100;
  cfg.initial_state = {0.0, 1.0, 0.0};
  cfg.estimator.initial_estimate = {1.0, 0.0, 0.0};
  cfg.estimator.p0 = Mat3::Identity();
  cfg.estimator.multipliers = {0.8, 0.9, 1.0, 1.1, 1.2};
  cfg.controller.kind = ControllerKind::kConstant;
  cfg.controller.omega = 3.0 * kGamma;
  cfg.realizations = 100;
  return cfg;
}

const std::vector<std::string>& recipe_names() {
  static const std::vector<std::string> names{"fig2-dynamics", "fig3-5-filters", "fig6-covariance", "fig7-8-mmae",
                                              "fig9-control"};
  return names;
}

ExperimentConfig built_in_recipe(std::string_view name) {
  ExperimentConfig cfg = base_recipe();
  cfg.name = std::string(name);
  if (name == "fig2-dynamics") {
    cfg.references = true;
  } else if (name == "fig3-5-filters") {
    cfg.estimator.kind = EstimatorKind::kEkf;
  } else if (name == "fig6-covariance") {
    cfg.estimator.kind = EstimatorKind::kEkf;
  } else if (name == "fig7-8-mmae") {
    cfg.estimator.kind = EstimatorKind::kMmaeEkf;
  } else if (name == "fig9-control") {
    cfg.estimator.kind = EstimatorKind::kEkf;
    cfg.controller.kind = ControllerKind::kLyapunovEstimated;
    cfg.controller.target = {0.0, 0.0, 1.0};
  } else {
    std::string list;
    for (const auto& n : recipe_names()) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown recipe '" + std::string(name) + "'; available: " + list);
  }
  return cfg;
}

}  // namespace qmon
