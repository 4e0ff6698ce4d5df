#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdmfc/config.hpp"

namespace pdmfc {

/// The four shipped experiment drivers.
///  - Nominal: uncontrolled fleet, safety switching only.
///  - Tracking: dual ascent on a price signal so the aggregate holds a
///    reference level (the nominal daily mean unless the config names one).
///  - Pricing: cost-optimal response to a time-of-use tariff.
///  - PricingClasses: three sub-fleets on staggered tariff windows, reported
///    per class and combined.
enum class ScenarioKind { Nominal, Tracking, Pricing, PricingClasses };

ScenarioKind scenario_from_name(const std::string& name); // throws ConfigError
std::string scenario_name(ScenarioKind kind);

/// Command-line knobs layered on top of a config file. Worker count changes
/// scheduling only, never results or artifacts.
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> trajectories;
    std::optional<int> iterations;
    int workers = 0;              ///< 0 = hardware default
    bool emit_fields = false;     ///< also dump value/density fields
    int dump_trajectories = 0;    ///< sample paths to write (0 = none)
};

/// Scenario-specific defaults layered onto a base config: forces the coupling
/// and running-cost kinds the scenario needs and fills in its default tables.
void apply_scenario(ScenarioConfig& cfg, ScenarioKind kind);

/// default_config() with apply_scenario on top; what the shipped config files
/// spell out explicitly.
ScenarioConfig scenario_default_config(ScenarioKind kind);

struct RunResult {
    ScenarioConfig effective;           ///< config actually run (resolved)
    std::vector<std::string> artifacts; ///< file names written under out_dir
    std::string summary;                ///< short human-readable report
};

/// Validate, run and write artifacts (aggregate.csv, scenario-specific series,
/// manifest.json; diagnostics.csv for iterative runs). Artifact bytes depend
/// only on config + seed, not on worker count or wallclock — except
/// diagnostics.csv, which carries per-iteration wallclock and is therefore
/// excluded from the manifest's hash list.
RunResult run_scenario(ScenarioKind kind, const ScenarioConfig& base,
                       const std::string& out_dir, const RunOverrides& ov = {});

} // namespace pdmfc
