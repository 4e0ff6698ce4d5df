#include "pdmfc/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdmfc {

double max_abs_drift(const ScenarioConfig& cfg) {
    double b = 0.0;
    for (double eps : cfg.drift.drain.values()) {
        for (int i = 0; i < cfg.grid.d; ++i) {
            for (double th : {cfg.grid.theta_lo, cfg.grid.theta_hi}) {
                const double heat = (i == kOff) ? 0.0 : cfg.drift.sigma_p;
                const double v = heat - cfg.drift.rho * (th - cfg.drift.theta_amb)
                                      - eps * (th - cfg.drift.theta_in);
                b = std::max(b, std::abs(v));
            }
        }
    }
    return b;
}

namespace {

void add(std::vector<Violation>& out, const std::string& field, const std::string& msg) {
    out.push_back({field, msg});
}

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace

std::vector<Violation> validate_config(const ScenarioConfig& cfg) {
    std::vector<Violation> v;
    const Grid& g = cfg.grid;

    if (g.d < 2) add(v, "grid.n_modes", "at least two modes required, got " + std::to_string(g.d));
    if (g.d > 16) add(v, "grid.n_modes", "at most 16 modes supported, got " + std::to_string(g.d));
    if (g.n_t < 1) add(v, "grid.n_steps", "need at least one time step");
    if (g.n_theta < 1) add(v, "grid.n_theta", "need at least one theta cell");
    if (!(g.horizon_h > 0.0)) add(v, "grid.horizon_h", "horizon must be positive");
    if (!(g.theta_lo < g.theta_hi))
        add(v, "grid.theta_lo", "theta_lo must be below theta_hi");

    if (!(cfg.drift.sigma_p > 0.0)) add(v, "physics.sigma_p", "heating power must be positive");
    if (cfg.drift.rho < 0.0) add(v, "physics.rho", "loss coefficient must be nonnegative");
    if (!cfg.drift.drain.well_formed())
        add(v, "physics.drain", "drain table must be nonempty with strictly increasing knots");
    else if (cfg.drift.drain.min_value() < 0.0)
        add(v, "physics.drain", "drain values must be nonnegative");

    if (!(cfg.safety.theta_min < cfg.safety.theta_max))
        add(v, "bounds.theta_min",
            "comfort band is empty: theta_min " + num(cfg.safety.theta_min) +
            " >= theta_max " + num(cfg.safety.theta_max));
    if (!(cfg.safety.peak > 0.0)) add(v, "bounds.safety_peak", "safety peak must be positive");
    if (!(cfg.safety.ramp_width > 0.0)) add(v, "bounds.ramp_width", "ramp width must be positive");

    // Band plus ramp must be interior to the grid so the safety ramps are resolved.
    if (cfg.safety.theta_min - cfg.safety.ramp_width < g.theta_lo ||
        cfg.safety.theta_max + cfg.safety.ramp_width > g.theta_hi)
        add(v, "grid.theta_lo",
            "grid must cover the comfort band plus one ramp width on each side");

    if (cfg.safety.theta_min < cfg.safety.theta_max) {
        double th0 = 0.0, thInf = 0.0;
        derived_theta_bounds(cfg.drift, cfg.safety, th0, thInf);
        if (g.theta_lo < th0 || g.theta_hi > thInf)
            add(v, "grid.theta_hi",
                "grid band [" + num(g.theta_lo) + ", " + num(g.theta_hi) +
                "] exceeds the reachable range [" + num(th0) + ", " + num(thInf) + "]");
    }

    if (cfg.coupling.kind == CouplingSpec::Kind::Tracking) {
        if (!(cfg.coupling.kappa > 0.0))
            add(v, "costs.kappa", "tracking weight must be strictly positive");
        if (!cfg.coupling.use_nominal_mean && !cfg.coupling.reference.well_formed())
            add(v, "costs.reference", "tracking needs a reference table or the nominal-mean flag");
    }
    if (cfg.running.kind == RunningSpec::Kind::Price && !cfg.running.price.well_formed())
        add(v, "costs.price", "price selector needs a well-formed tariff table");
    for (std::size_t c = 0; c < cfg.running.price_classes.size(); ++c)
        if (!cfg.running.price_classes[c].well_formed())
            add(v, "costs.price_classes", "tariff table " + std::to_string(c) + " malformed");

    if (!(cfg.initial.on_probability >= 0.0 && cfg.initial.on_probability <= 1.0))
        add(v, "initial.on_probability", "must lie in [0, 1]");

    if (cfg.algo.trajectories < 1) add(v, "algo.trajectories", "need at least one trajectory");
    if (cfg.algo.iterations < 1) add(v, "algo.iterations", "need at least one iteration");
    if (cfg.algo.step_a < 0.0) add(v, "algo.step_a", "step constant must be nonnegative");
    if (!(cfg.algo.phi_guard > 0.0)) add(v, "algo.phi_guard", "guard must be positive");
    if (!(cfg.algo.lambda_guard > 0.0)) add(v, "algo.lambda_guard", "guard must be positive");
    if (cfg.algo.density_refine < 1) add(v, "algo.density_refine", "refine factor must be >= 1");

    if (cfg.jump_cost.kind == JumpCost::Kind::Custom &&
        (!cfg.jump_cost.l || !cfg.jump_cost.l_prime || !cfg.jump_cost.h || !cfg.jump_cost.h_prime))
        add(v, "jump_cost", "custom cost must supply l, l', H and H'");

    // Step-size conditions: the transport ratio must not exceed one cell per step,
    // and safety rates alone must keep per-step jump probabilities below one.
    if (v.empty()) {
        const double b = max_abs_drift(cfg);
        const double ratio = b * g.dt() / g.dtheta();
        if (ratio > 1.0)
            add(v, "grid.n_steps",
                "transport condition violated: max |drift| " + num(b) + " * dt " + num(g.dt()) +
                " exceeds one theta cell (ratio " + num(ratio) + ")");
        const double jr = g.dt() * cfg.safety.peak;
        if (jr > 1.0)
            add(v, "bounds.safety_peak",
                "per-step jump probability from safety rates alone exceeds one (dt*peak = " +
                num(jr) + ")");
    }
    return v;
}

std::vector<double> reference_series(const ScenarioConfig& cfg) {
    if (cfg.coupling.kind != CouplingSpec::Kind::Tracking)
        throw ConfigError("reference_series: coupling cost is not tracking");
    if (!cfg.coupling.reference.well_formed())
        throw ConfigError("reference_series: reference unresolved (nominal-mean not expanded)");
    return cfg.coupling.reference.sample(cfg.grid);
}

void resolve_reference(ScenarioConfig& cfg, double nominal_mean) {
    cfg.coupling.reference = TimeTable::constant(nominal_mean);
    cfg.coupling.use_nominal_mean = false;
}

} // namespace pdmfc
