// Built-in experiment configurations for the leaky-cavity qubit.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qmon/config.hpp"

namespace qmon {

/// Shared parameters: Gamma = 10, omega_r = 5 Gamma, M = 1, eta = 0.8,
/// dt = 1e-3, T = 1, x0 = (0, 1, 0), xhat0 = (1, 0, 0), 100 realizations,
/// constant Omega = 3 Gamma.
ExperimentConfig base_recipe();

/// Throws ConfigError listing the known names when `name` is unknown.
ExperimentConfig built_in_recipe(std::string_view name);

const std::vector<std::string>& recipe_names();

}  // namespace qmon
