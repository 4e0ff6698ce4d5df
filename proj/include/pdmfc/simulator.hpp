#pragma once

#include <cstdint>
#include <vector>

#include "pdmfc/config.hpp"
#include "pdmfc/fields.hpp"
#include "pdmfc/rng.hpp"

namespace pdmfc {

/// One simulated load path. Temperatures are sampled on the output grid
/// (n_t + 1 points); jumps land on step-end times, so between consecutive
/// recorded jumps the temperature samples replay exactly through advance_flow
/// with the segment's mode.
struct Trajectory {
    StatePoint initial;
    std::vector<double> jump_times;    ///< increasing, step-end aligned
    std::vector<int> modes;            ///< per segment; modes[0] = initial.mode
    std::vector<double> theta_samples; ///< size n_t + 1
};

/// Segment modes expanded onto the sample grid: out[n] = mode at time t_n
/// (a jump recorded at t_n takes effect at t_n).
std::vector<int> modes_on_grid(const Trajectory& tr, const Grid& g);

/// Population summary accumulated without storing paths. Deterministic for a
/// fixed (seed, M) under any worker count: per-trajectory streams are indexed
/// and partial sums are combined in fixed chunk order.
struct PopulationStats {
    int trajectories = 0;
    std::vector<double> aggregate;     ///< mean consumption per time point
    double initial_on_fraction = 0.0;
    double mean_running_cost = 0.0;    ///< E int c dt, left-rectangle in time
    double mean_switch_cost = 0.0;     ///< E int sum_j L(alpha_j) dt (control only)
    double mean_terminal_cost = 0.0;   ///< E g(X_T)
    double outside_band_fraction = 0.0; ///< samples outside band +/- 2 dtheta
    long long bound_violations = 0;    ///< samples outside the a.s. bounds
    double theta_min_seen = 0.0;
    double theta_max_seen = 0.0;
    long long jump_count = 0;

    double mean_cost_G() const {
        return mean_running_cost + mean_switch_cost + mean_terminal_cost;
    }
};

/// Simulate one load under the given switching-rate field (null = no control,
/// safety rates only). Per step of length dt, the temperature advances along the
/// exact flow of the step-start mode; a mode jump fires with probability
/// dt * (total rate at step start) and takes effect at the step end, with the
/// target drawn proportionally to the individual rates. Both step-size
/// conditions must hold so that per-step probabilities stay in [0, 1].
Trajectory simulate_trajectory(const ControlField* alpha, const ScenarioConfig& cfg,
                               RandomStream rs);

/// M independent loads; trajectory k uses the stream (seed, k).
std::vector<Trajectory> simulate_population(const ControlField* alpha,
                                            const ScenarioConfig& cfg, int M,
                                            std::uint64_t seed, int workers = 0);

/// Streaming variant of simulate_population: identical per-trajectory draws,
/// no path storage. Use for large M and inside the dual loop.
PopulationStats simulate_stats(const ControlField* alpha, const ScenarioConfig& cfg,
                               int M, std::uint64_t seed, int workers = 0);

/// Mean consumption per time point. Values lie in [0, 1].
std::vector<double> aggregate_consumption(const std::vector<Trajectory>& trajs,
                                          const Grid& g);

/// Empirical total cost: coupling term evaluated on the empirical aggregate plus
/// the per-load mean of running, switching and terminal costs, all by trapezoid
/// quadrature on the grid. Requires a resolved reference when tracking is on.
double estimate_cost_JN(const std::vector<Trajectory>& trajs, const ControlField* alpha,
                        const ScenarioConfig& cfg);

} // namespace pdmfc
