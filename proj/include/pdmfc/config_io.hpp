#pragma once

#include <string>

#include "pdmfc/config.hpp"

namespace pdmfc {

/// Baseline scenario parameters: the default physics plus a day-shaped drain
/// profile (background draw with morning and late-evening peaks).
ScenarioConfig default_config();

/// Parse a JSON config. Absent sections keep their defaults; unknown keys are
/// rejected. `origin` names the source in error messages.
ScenarioConfig parse_config_json(const std::string& text,
                                 const std::string& origin = "config");

ScenarioConfig load_config_file(const std::string& path);

/// Stable, fully-materialized JSON for a config (defaults spelled out, keys
/// sorted). parse_config_json(canonical_config_json(c)) reproduces c, so two
/// configs are equivalent iff their canonical forms match byte for byte.
/// Throws ConfigError for code-level hooks (custom costs) that files cannot
/// express.
std::string canonical_config_json(const ScenarioConfig& cfg);

} // namespace pdmfc
