#pragma once

#include <vector>

#include "pdmfc/config.hpp"
#include "pdmfc/fields.hpp"

namespace pdmfc {

struct SolverSettings {
    double phi_guard = 1e7; ///< abort when |phi| grows past this
    int theta_refine = 1;   ///< theta sub-grid factor for forward_density
};

/// Step-size report. `transport_ratio` is max|drift| * dt / dtheta, bounding the
/// foot of the backward characteristic to one cell (keeps the interpolated
/// update monotone). `jump_ratio` is dt * (total switching intensity bound) and
/// must stay within 1 so per-step jump probabilities are genuine probabilities.
struct CflReport {
    bool passed = false;
    double transport_ratio = 0.0;
    double jump_ratio = 0.0;
    double max_drift = 0.0;
};

CflReport cfl_check(const ScenarioConfig& cfg, double alpha_bound);

/// A-priori sup bound on extracted switching rates: solve once with lambda = 0
/// and no control incentive beyond the costs in cfg, then bound any optimal
/// rate by h'(2 * max |phi|), since rates react to value differences between
/// modes and those are capped by twice the sup norm.
double apriori_alpha_bound(const ScenarioConfig& cfg, const SolverSettings& s = {});

/// Backward value sweep for the price signal lambda (one value per time point).
/// Dynamic-programming form matched step for step to the simulator: exact flow
/// of the step-start mode, then a linear-in-dt jump exchange, with the
/// switching cost already minimized out through h.
ValueField solve_phi(const std::vector<double>& lambda, const ScenarioConfig& cfg,
                     const SolverSettings& s = {});

/// Optimal switching rates from a solved value field:
/// alpha_j(t_n, i, theta) = h'( phi(t_{n+1}, i, flow(theta)) - phi(t_{n+1}, j, flow(theta)) ),
/// i.e. the exact minimizer of the one-step dynamic-programming update. The last
/// time index repeats the previous one (no step remains to act on). Throws if
/// the resulting total intensity breaks the per-step probability bound.
ControlField extract_control(const ValueField& phi, const ScenarioConfig& cfg);

/// Forward law of the controlled process on the grid (theta refined by
/// s.theta_refine): push each node's mass along the exact flow, split it onto
/// the bracketing nodes, and exchange dt * rate between modes — the exact
/// adjoint of the backward update when theta_refine == 1. Starts from the
/// configured initial law (uniform temperature over the comfort band, Bernoulli
/// mode). Mass is conserved to 1e-10 per step or the solver throws.
ValueField forward_density(const ControlField* alpha, const ScenarioConfig& cfg,
                           const SolverSettings& s = {});

/// Mean consumption under a density: sum of mass across heating modes, per
/// time point.
std::vector<double> expected_consumption(const ValueField& density);

} // namespace pdmfc
