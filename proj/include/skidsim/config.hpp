#pragma once

// Scenario files: YAML, tagged with `schema: skidsim.scenario/1`. Every
// rejection is a ConfigError carrying the 1-based line of the offending node.

#include <filesystem>
#include <string>
#include <string_view>

#include "skidsim/engine.hpp"

namespace skidsim {

inline constexpr std::string_view kScenarioSchema = "skidsim.scenario/1";

ScenarioConfig parse_scenario(std::string_view yaml_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

// Emits a document parse_scenario reads back to an equal config. RBF centers
// are written out explicitly when the controller has them.
std::string scenario_to_yaml(const ScenarioConfig& config);

}  // namespace skidsim
