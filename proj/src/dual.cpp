#include "pdmfc/dual.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pdmfc/dynamics.hpp"
#include "pdmfc/errors.hpp"
#include "pdmfc/rng.hpp"
#include "pdmfc/simulator.hpp"

namespace pdmfc {
namespace {

void require_tracking(const ScenarioConfig& cfg, const char* who) {
    if (cfg.coupling.kind != CouplingSpec::Kind::Tracking)
        throw ConfigError(std::string(who) + " requires a tracking coupling");
}

/// Expected pathwise cost under a density: running + switching per step
/// (left rectangle, matching the value sweep) plus the terminal cost.
double density_cost_G(const ValueField& density, const ControlField* alpha,
                      const ScenarioConfig& cfg) {
    const Grid& g = cfg.grid;
    const double dt = g.dt();
    const bool aligned = (density.n_nodes == (alpha ? alpha->n_nodes : -1)) &&
                         density.dtheta == (alpha ? alpha->dtheta : 0.0);
    double total = 0.0;
    for (int n = 0; n < g.n_t; ++n) {
        const double t = g.time(n);
        double slice = 0.0;
        for (int i = 0; i < density.d; ++i) {
            for (int k = 0; k < density.n_nodes; ++k) {
                const double mass = density.at(n, i, k);
                if (mass == 0.0) continue;
                const double th = density.theta(k);
                double c = running_cost_c(t, StatePoint{i, th}, cfg);
                if (alpha != nullptr) {
                    for (int j = 0; j < density.d; ++j) {
                        if (j == i) continue;
                        const double a = aligned ? alpha->at(n, i, j, k)
                                                 : alpha->rate_at(n, i, j, th);
                        c += L_value(a, cfg.jump_cost);
                    }
                }
                slice += mass * c;
            }
        }
        total += dt * slice;
    }
    for (int i = 0; i < density.d; ++i) {
        double mass = 0.0;
        for (int k = 0; k < density.n_nodes; ++k) mass += density.at(g.n_t, i, k);
        total += mass * cfg.terminal.value(i);
    }
    return total;
}

/// Assemble W, U and the norms from an aggregate and the pathwise mean cost.
GradientSample assemble(const std::vector<double>& lambda, const ScenarioConfig& cfg,
                        std::vector<double> aggregate, double mean_G) {
    const Grid& g = cfg.grid;
    const double dt = g.dt();
    const double kappa = cfg.coupling.kappa;
    const std::vector<double> ref = reference_series(cfg);

    GradientSample out;
    out.v = best_response_v(lambda, cfg);
    out.aggregate = std::move(aggregate);
    out.U.resize(out.aggregate.size());

    double w = mean_G;
    double gn2 = 0.0;
    double se2 = 0.0;
    const int n_pts = g.n_time_points();
    for (int n = 0; n < n_pts; ++n) {
        const std::size_t s = static_cast<std::size_t>(n);
        out.U[s] = out.aggregate[s] - out.v[s];
        const double dev = out.aggregate[s] - ref[s];
        se2 += dev * dev;
        if (n < g.n_t) {
            const double vr = out.v[s] - ref[s];
            w += dt * (out.aggregate[s] * lambda[s] + kappa * vr * vr -
                       out.v[s] * lambda[s]);
            gn2 += dt * out.U[s] * out.U[s];
        }
    }
    out.W = w;
    out.grad_norm = std::sqrt(gn2);
    out.tracking_rmse = std::sqrt(se2 / static_cast<double>(n_pts));
    if (!std::isfinite(out.W) || !std::isfinite(out.grad_norm))
        throw NumericError("dual functional evaluated to a non-finite value");
    return out;
}

} // namespace

std::vector<double> best_response_v(const std::vector<double>& lambda,
                                    const ScenarioConfig& cfg) {
    require_tracking(cfg, "best_response_v");
    const std::vector<double> ref = reference_series(cfg);
    if (lambda.size() < ref.size())
        throw std::invalid_argument("best_response_v: lambda must cover every time point");
    std::vector<double> v(ref.size());
    const double half_inv_kappa = 0.5 / cfg.coupling.kappa;
    for (std::size_t n = 0; n < ref.size(); ++n)
        v[n] = ref[n] + lambda[n] * half_inv_kappa;
    return v;
}

GradientSample dual_gradient(const std::vector<double>& lambda,
                             const ScenarioConfig& cfg, int trajectories,
                             std::uint64_t seed, int workers) {
    require_tracking(cfg, "dual_gradient");
    const ValueField phi = solve_phi(lambda, cfg);
    const ControlField alpha = extract_control(phi, cfg);
    PopulationStats stats = simulate_stats(&alpha, cfg, trajectories, seed, workers);
    return assemble(lambda, cfg, std::move(stats.aggregate), stats.mean_cost_G());
}

GradientSample dual_gradient_density(const std::vector<double>& lambda,
                                     const ScenarioConfig& cfg,
                                     const SolverSettings& settings) {
    require_tracking(cfg, "dual_gradient_density");
    const ValueField phi = solve_phi(lambda, cfg, settings);
    const ControlField alpha = extract_control(phi, cfg);
    const ValueField density = forward_density(&alpha, cfg, settings);
    return assemble(lambda, cfg, expected_consumption(density),
                    density_cost_G(density, &alpha, cfg));
}

double dual_value_estimate(const std::vector<double>& lambda, const ScenarioConfig& cfg,
                           int trajectories, std::uint64_t seed, int workers) {
    return dual_gradient(lambda, cfg, trajectories, seed, workers).W;
}

double dual_value_density(const std::vector<double>& lambda, const ScenarioConfig& cfg,
                          const SolverSettings& settings) {
    return dual_gradient_density(lambda, cfg, settings).W;
}

UzawaOptions UzawaOptions::from_config(const ScenarioConfig& cfg) {
    UzawaOptions o;
    o.iterations = cfg.algo.iterations;
    o.trajectories = cfg.algo.trajectories;
    o.step_a = cfg.algo.step_a;
    o.seed = cfg.algo.seed;
    o.lambda_guard = cfg.algo.lambda_guard;
    o.solver.phi_guard = cfg.algo.phi_guard;
    return o;
}

UzawaResult uzawa_run(const ScenarioConfig& cfg, const UzawaOptions& opts) {
    require_tracking(cfg, "uzawa_run");
    if (opts.iterations < 0)
        throw std::invalid_argument("uzawa_run: iterations must be nonnegative");

    const int n_pts = cfg.grid.n_time_points();
    UzawaResult res;
    res.lambda.assign(static_cast<std::size_t>(n_pts), 0.0);
    res.history.reserve(static_cast<std::size_t>(opts.iterations));

    const auto t0 = std::chrono::steady_clock::now();
    for (int k = 0; k < opts.iterations; ++k) {
        GradientSample sample;
        if (opts.deterministic) {
            sample = dual_gradient_density(res.lambda, cfg, opts.solver);
        } else {
            const std::uint64_t seed_k =
                derive_seed(opts.seed, 1000u + static_cast<std::uint64_t>(k));
            sample = dual_gradient(res.lambda, cfg, opts.trajectories, seed_k,
                                   opts.workers);
        }

        const double step = opts.step_a / static_cast<double>(k + 1);
        double peak = 0.0;
        for (int n = 0; n < n_pts; ++n) {
            const std::size_t s = static_cast<std::size_t>(n);
            res.lambda[s] += step * sample.U[s];
            peak = std::max(peak, std::abs(res.lambda[s]));
        }
        if (!std::isfinite(peak) || peak > opts.lambda_guard)
            throw NumericError("price signal diverged during the ascent loop; "
                               "reduce the step constant");

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.history.push_back(UzawaIterationRow{k, sample.grad_norm, sample.W,
                                                sample.tracking_rmse, wall});
    }

    res.phi = solve_phi(res.lambda, cfg, opts.solver);
    res.control = extract_control(res.phi, cfg);
    return res;
}

} // namespace pdmfc
