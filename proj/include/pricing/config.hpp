// SPDX-License-Identifier: MIT
//
// JSON experiment documents. Parsing is strict: unknown keys are errors.
#pragma once

#include <string>

#include <json.hpp>

#include "pricing/harness.hpp"

namespace pricing {

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);  // ConfigError on I/O or parse failure
nlohmann::json to_json(const ExperimentConfig& cfg);

// Canned experiments: "fig2a", "fig2b", "fig2c".
ExperimentConfig repro_config(const std::string& name);
// Grid used by the fig2c sweep.
std::string repro_sweep_grid();

}  // namespace pricing
