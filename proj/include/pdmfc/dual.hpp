#pragma once

#include <cstdint>
#include <vector>

#include "pdmfc/config.hpp"
#include "pdmfc/fields.hpp"
#include "pdmfc/hjb.hpp"

namespace pdmfc {

/// Pointwise maximizer of <v, lambda> - F(v) for the quadratic tracking
/// penalty: v_n = reference_n + lambda_n / (2 kappa).
std::vector<double> best_response_v(const std::vector<double>& lambda,
                                    const ScenarioConfig& cfg);

/// One evaluation of the dual functional and its gradient at a price signal:
/// solve the value sweep, extract the optimal rates, run the forward pass, and
/// assemble U = aggregate - v. `grad_norm` is the discrete L2 norm of U under
/// the same left-rectangle time weights the functional itself uses, so a
/// stationary signal reads as grad_norm -> 0.
struct GradientSample {
    std::vector<double> U;
    std::vector<double> aggregate;
    std::vector<double> v;
    double W = 0.0;
    double grad_norm = 0.0;
    double tracking_rmse = 0.0;
};

/// Monte Carlo forward pass with `trajectories` independent loads.
GradientSample dual_gradient(const std::vector<double>& lambda,
                             const ScenarioConfig& cfg, int trajectories,
                             std::uint64_t seed, int workers = 0);

/// Deterministic forward pass through the exact mass-transport adjoint of the
/// value sweep. With settings.theta_refine == 1 the returned W is the discrete
/// dual functional evaluated without sampling error.
GradientSample dual_gradient_density(const std::vector<double>& lambda,
                                     const ScenarioConfig& cfg,
                                     const SolverSettings& settings = {});

double dual_value_estimate(const std::vector<double>& lambda, const ScenarioConfig& cfg,
                           int trajectories, std::uint64_t seed, int workers = 0);
double dual_value_density(const std::vector<double>& lambda, const ScenarioConfig& cfg,
                          const SolverSettings& settings = {});

struct UzawaOptions {
    int iterations = 100;
    int trajectories = 10000;
    double step_a = 2.0;      ///< step k uses step_a / (k + 1)
    std::uint64_t seed = 0;
    int workers = 0;
    bool deterministic = false; ///< use the density forward pass instead of MC
    SolverSettings solver{};
    double lambda_guard = 1e4;

    static UzawaOptions from_config(const ScenarioConfig& cfg);
};

struct UzawaIterationRow {
    int iteration = 0;
    double grad_norm = 0.0;
    double w_estimate = 0.0;
    double tracking_rmse = 0.0;
    double wallclock_s = 0.0;
};

struct UzawaResult {
    std::vector<double> lambda;
    ValueField phi;        ///< value field at the final signal
    ControlField control;  ///< rates extracted from it
    std::vector<UzawaIterationRow> history;
};

/// Projected-ascent loop on the price signal: lambda_{k+1} = lambda_k +
/// step_k * U(lambda_k), with a fresh sub-seed per iteration so Monte Carlo
/// noise is independent across steps. Requires a tracking coupling with a
/// resolved reference. Throws NumericError if the signal passes lambda_guard.
UzawaResult uzawa_run(const ScenarioConfig& cfg, const UzawaOptions& opts);

} // namespace pdmfc
