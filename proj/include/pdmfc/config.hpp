#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdmfc/core.hpp"
#include "pdmfc/dynamics.hpp"

namespace pdmfc {

/// Aggregate-coupling cost f(t, E[p]). Tracking is the strictly convex quadratic
/// kappa*(e - r(t))^2; None disables the coupling (and with it the dual machinery).
struct CouplingSpec {
    enum class Kind { None, Tracking };
    Kind kind = Kind::None;
    double kappa = 1.0;
    /// Reference signal r(t). Empty with use_nominal_mean set means "resolve to the
    /// nominal aggregate's daily mean before running" (done by run_scenario).
    TimeTable reference;
    bool use_nominal_mean = false;
};

/// Per-load running cost c(t, x). Price charges tariff(t) * p(x); Custom is a
/// code-level hook for tests and experiments (not expressible in config files).
struct RunningSpec {
    enum class Kind { None, Price, Custom };
    Kind kind = Kind::None;
    TimeTable price;
    std::vector<TimeTable> price_classes; ///< three shifted tariffs (class scenario)
    std::function<double(double, StatePoint)> custom;
};

/// Terminal cost g per mode (theta-independent constants; zero by default).
struct TerminalCost {
    std::vector<double> g = {0.0, 0.0};
    double value(int mode) const {
        return mode < static_cast<int>(g.size()) ? g[mode] : 0.0;
    }
};

/// Initial law: theta uniform on [theta_min, theta_max], mode ON with this probability.
struct InitialLaw {
    double on_probability = 0.38;
};

/// Algorithm knobs shared by the simulator, the sweep and the dual loop.
struct AlgoParams {
    int trajectories = 10000;   ///< M
    int iterations = 100;       ///< K (dual loop)
    double step_a = 1.0;        ///< ascent step constant: rho_k = a/(k+1)
    std::uint64_t seed = 946370;
    double lambda_guard = 1.0e4;  ///< divergence guard on max|lambda|
    double phi_guard = 1.0e7;     ///< divergence guard on max|phi| during the sweep
    int density_refine = 1;       ///< theta sub-grid factor for density transport
};

/// Everything one run needs. Hours and Celsius internally; config files declare
/// units in their field names and are converted at ingestion.
struct ScenarioConfig {
    Grid grid;
    DriftModel drift;
    SafetyIntensity safety;
    CouplingSpec coupling;
    RunningSpec running;
    TerminalCost terminal;
    InitialLaw initial;
    JumpCost jump_cost;
    AlgoParams algo;
};

/// Per-load running cost at (t, state) under the configured selector.
inline double running_cost_c(double t, StatePoint s, const ScenarioConfig& cfg) {
    switch (cfg.running.kind) {
        case RunningSpec::Kind::None: return 0.0;
        case RunningSpec::Kind::Price: return cfg.running.price.value_at(t) * consumption_p(t, s);
        case RunningSpec::Kind::Custom: return cfg.running.custom(t, s);
    }
    return 0.0;
}

/// Largest |drift| over the grid box, all modes and all drain values. The drift
/// is affine in theta for fixed (mode, drain), so the extremes sit at the box edges.
double max_abs_drift(const ScenarioConfig& cfg);

/// Structural and stability validation. Empty result means runnable:
/// shapes and signs are sound, tables well-formed, the comfort band sits inside
/// the grid with ramp margin, the grid band lies within the almost-sure
/// temperature bounds, and both step-size conditions hold (the transport CFL
/// condition B*dt/dtheta <= 1 and the jump-probability bound dt*peak <= 1;
/// the control part of the jump bound is re-checked a-posteriori on every
/// extracted control).
std::vector<Violation> validate_config(const ScenarioConfig& cfg);

/// r(t) sampled on the grid. Throws ConfigError when the reference is still
/// unresolved (use_nominal_mean without a table).
std::vector<double> reference_series(const ScenarioConfig& cfg);

/// Resolve a nominal-mean reference into a constant table.
void resolve_reference(ScenarioConfig& cfg, double nominal_mean);

} // namespace pdmfc
