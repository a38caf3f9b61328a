#pragma once

#include <string>
#include <vector>

#include "tcspc/sim/config.hpp"

namespace tcspc {

// Flat "key = value" text with unit-suffixed keys; '#' comments; no nesting.
// Unknown keys are rejected by name, missing required keys are listed, and
// out-of-range values are reported with the violated invariant.
ExperimentConfig parse_config(const std::string& text, const std::string& context);
ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& config);

const std::vector<std::string>& required_config_keys();

// Resolves a preset name ("p12_quadrupole") to <preset-dir>/<name>.cfg,
// honoring the TCSPC_PRESET_DIR environment variable over the built-in
// source-tree default.
std::string preset_path(const std::string& name);

}  // namespace tcspc
