#pragma once

#include "cpsem/models.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>

namespace cpsem {

/// A model, its parameters and the data-generation settings, as stored in a
/// JSON configuration document. Recognized keys:
///
///   model     "linear" | "kitagawa" | "lorenz"
///   A, Q, R   linear parameters (Q, R also for kitagawa)
///   sigma_q2, sigma_r2, dt   lorenz parameters
///   x0_mean   number (scalar models) or 3-array (lorenz)
///   x0_var    initial variance (isotropic for lorenz)
///   T, seed   series length and data seed
///
/// Missing keys take the family defaults; for the linear model a missing
/// x0_var means the stationary variance Q / (1 - A^2).
struct ModelConfig {
    Theta theta = ThetaLinear{};
    int horizon = 100;
    std::uint64_t seed = 42;
};

ModelConfig model_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ModelConfig& config);

/// Default configuration for a family (the standard experiment settings).
ModelConfig default_model_config(ModelFamily family);

}  // namespace cpsem
