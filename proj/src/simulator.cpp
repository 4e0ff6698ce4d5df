#include "pdmfc/simulator.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "pdmfc/dynamics.hpp"
#include "pdmfc/errors.hpp"

namespace pdmfc {
namespace {

constexpr int kMaxModes = 16; // matches the validate_config cap
constexpr int kChunk = 256;   // fixed reduction granularity, do not tie to workers

/// Everything the per-trajectory kernel reads but never mutates.
struct SimContext {
    const ScenarioConfig& cfg;
    const ControlField* alpha; // may be null
    FlowTables flow;
    std::vector<double> price; // running price sampled per step, empty if unused
    double theta_floor = 0.0;  // a.s. lower bound
    double theta_ceil = 0.0;   // a.s. upper bound
    double band_lo = 0.0;      // comfort band widened by 2 dtheta
    double band_hi = 0.0;

    explicit SimContext(const ScenarioConfig& c, const ControlField* a)
        : cfg(c), alpha(a), flow(c.grid, c.drift) {
        if (a != nullptr) a->validate();
        if (c.running.kind == RunningSpec::Kind::Price) {
            price.resize(static_cast<std::size_t>(c.grid.n_t));
            for (int n = 0; n < c.grid.n_t; ++n)
                price[static_cast<std::size_t>(n)] = c.running.price.value_at(c.grid.time(n));
        }
        derived_theta_bounds(c.drift, c.safety, theta_floor, theta_ceil);
        band_lo = c.safety.theta_min - 2.0 * c.grid.dtheta();
        band_hi = c.safety.theta_max + 2.0 * c.grid.dtheta();
    }

    double running_cost(int n, int mode, double theta) const {
        switch (cfg.running.kind) {
        case RunningSpec::Kind::None:
            return 0.0;
        case RunningSpec::Kind::Price:
            return price[static_cast<std::size_t>(n)] *
                   consumption_p(cfg.grid.time(n), StatePoint{mode, theta});
        case RunningSpec::Kind::Custom:
            return cfg.running.custom(cfg.grid.time(n), StatePoint{mode, theta});
        }
        return 0.0;
    }
};

/// Records the full path.
struct PathRecorder {
    Trajectory* out;
    const Grid* grid;

    void begin(int mode, double theta) {
        out->initial = StatePoint{mode, theta};
        out->jump_times.clear();
        out->modes.assign(1, mode);
        out->theta_samples.assign(static_cast<std::size_t>(grid->n_time_points()), 0.0);
        out->theta_samples[0] = theta;
    }
    void step(int /*n*/, int /*mode*/, double /*theta*/, const double* /*ctrl*/, int /*d*/) {}
    void jump(double t, int mode) {
        out->jump_times.push_back(t);
        out->modes.push_back(mode);
    }
    void sample(int n, int /*mode*/, double theta) {
        out->theta_samples[static_cast<std::size_t>(n)] = theta;
    }
    void end(int /*mode*/, double /*theta*/) {}
};

/// Accumulates population sums for one chunk; combined in chunk order later.
struct ChunkAccum {
    std::vector<double> consumption_sum; // per time point
    double running_cost = 0.0;
    double switch_cost = 0.0;
    double terminal_cost = 0.0;
    long long on_at_start = 0;
    long long outside_band = 0;
    long long bound_violations = 0;
    long long jumps = 0;
    long long samples = 0;
    double theta_min_seen = std::numeric_limits<double>::infinity();
    double theta_max_seen = -std::numeric_limits<double>::infinity();
    int count = 0;
};

struct StatsRecorder {
    const SimContext* ctx;
    ChunkAccum* acc;
    double dt;

    void note_sample(int n, int mode, double theta) {
        acc->consumption_sum[static_cast<std::size_t>(n)] +=
            consumption_p(ctx->cfg.grid.time(n), StatePoint{mode, theta});
        acc->samples += 1;
        if (theta < ctx->band_lo || theta > ctx->band_hi) acc->outside_band += 1;
        if (theta < ctx->theta_floor - 1e-9 || theta > ctx->theta_ceil + 1e-9)
            acc->bound_violations += 1;
        acc->theta_min_seen = std::min(acc->theta_min_seen, theta);
        acc->theta_max_seen = std::max(acc->theta_max_seen, theta);
    }

    void begin(int mode, double theta) {
        acc->count += 1;
        if (mode == kOn) acc->on_at_start += 1;
        note_sample(0, mode, theta);
    }
    void step(int n, int mode, double theta, const double* ctrl, int d) {
        acc->running_cost += dt * ctx->running_cost(n, mode, theta);
        if (ctrl != nullptr) {
            double l_sum = 0.0;
            for (int j = 0; j < d; ++j)
                if (j != mode) l_sum += L_value(ctrl[j], ctx->cfg.jump_cost);
            acc->switch_cost += dt * l_sum;
        }
    }
    void jump(double /*t*/, int /*mode*/) { acc->jumps += 1; }
    void sample(int n, int mode, double theta) { note_sample(n, mode, theta); }
    void end(int mode, double /*theta*/) { acc->terminal_cost += ctx->cfg.terminal.value(mode); }
};

/// One full path. Draw order is fixed per step (one uniform always consumed)
/// so a path is bit-identical regardless of recorder or worker layout.
template <class Recorder>
void run_one(const SimContext& ctx, RandomStream& rs, Recorder& rec) {
    const Grid& g = ctx.cfg.grid;
    const SafetyIntensity& si = ctx.cfg.safety;
    const double dt = g.dt();
    const int d = g.d;

    const double u_theta = rs.uniform();
    const double u_mode = rs.uniform();
    double theta = si.theta_min + u_theta * (si.theta_max - si.theta_min);
    int mode = (u_mode < ctx.cfg.initial.on_probability) ? kOn : kOff;
    rec.begin(mode, theta);

    std::array<double, kMaxModes> rate{};
    std::array<double, kMaxModes> ctrl{};
    for (int n = 0; n < g.n_t; ++n) {
        const double t = g.time(n);
        double total = 0.0;
        for (int j = 0; j < d; ++j) {
            if (j == mode) {
                rate[static_cast<std::size_t>(j)] = 0.0;
                ctrl[static_cast<std::size_t>(j)] = 0.0;
                continue;
            }
            const double a =
                ctx.alpha ? ctx.alpha->rate_at(n, mode, j, theta) : 0.0;
            const double h = hat_alpha(t, StatePoint{mode, theta}, j, si);
            ctrl[static_cast<std::size_t>(j)] = a;
            rate[static_cast<std::size_t>(j)] = a + h;
            total += a + h;
        }
        rec.step(n, mode, theta, ctx.alpha ? ctrl.data() : nullptr, d);

        const double p_jump = total * dt;
        if (p_jump > 1.0 + 1e-9)
            throw NumericError("per-step jump probability exceeds one; decrease the time step");

        const double u = rs.uniform();
        theta = ctx.flow.advance(n, mode, theta);
        if (u < p_jump) {
            // u / dt is uniform on [0, total) given a jump
            const double x = u / dt;
            int target = -1;
            double csum = 0.0;
            for (int j = 0; j < d; ++j) {
                if (j == mode) continue;
                csum += rate[static_cast<std::size_t>(j)];
                target = j;
                if (x < csum) break;
            }
            mode = target;
            rec.jump(g.time(n + 1), mode);
        }
        rec.sample(n + 1, mode, theta);
    }
    rec.end(mode, theta);
}

/// Run trajectories [0, M) split into fixed chunks over a small pool. `work`
/// is called as work(chunk_index, first_trajectory, last_trajectory).
template <class Work>
void parallel_chunks(int M, int workers, Work&& work) {
    const int n_chunks = (M + kChunk - 1) / kChunk;
    int W = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    W = std::clamp(W, 1, std::max(1, n_chunks));

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto body = [&]() {
        for (;;) {
            const int c = next.fetch_add(1);
            if (c >= n_chunks || failed.load()) return;
            const int lo = c * kChunk;
            const int hi = std::min(M, lo + kChunk);
            try {
                work(c, lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> lk(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    if (W == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(W));
        for (int w = 0; w < W; ++w) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace

std::vector<int> modes_on_grid(const Trajectory& tr, const Grid& g) {
    std::vector<int> out(static_cast<std::size_t>(g.n_time_points()), tr.initial.mode);
    std::size_t seg = 0;
    for (int n = 0; n < g.n_time_points(); ++n) {
        const double t = g.time(n);
        while (seg < tr.jump_times.size() && tr.jump_times[seg] <= t + 0.5 * g.dt())
            ++seg;
        out[static_cast<std::size_t>(n)] = tr.modes[seg];
    }
    return out;
}

Trajectory simulate_trajectory(const ControlField* alpha, const ScenarioConfig& cfg,
                               RandomStream rs) {
    SimContext ctx(cfg, alpha);
    Trajectory tr;
    PathRecorder rec{&tr, &cfg.grid};
    run_one(ctx, rs, rec);
    return tr;
}

std::vector<Trajectory> simulate_population(const ControlField* alpha,
                                            const ScenarioConfig& cfg, int M,
                                            std::uint64_t seed, int workers) {
    if (M < 1) throw std::invalid_argument("simulate_population: M must be positive");
    SimContext ctx(cfg, alpha);
    std::vector<Trajectory> out(static_cast<std::size_t>(M));
    parallel_chunks(M, workers, [&](int /*chunk*/, int lo, int hi) {
        for (int k = lo; k < hi; ++k) {
            RandomStream rs(seed, static_cast<std::uint64_t>(k));
            PathRecorder rec{&out[static_cast<std::size_t>(k)], &cfg.grid};
            run_one(ctx, rs, rec);
        }
    });
    return out;
}

PopulationStats simulate_stats(const ControlField* alpha, const ScenarioConfig& cfg,
                               int M, std::uint64_t seed, int workers) {
    if (M < 1) throw std::invalid_argument("simulate_stats: M must be positive");
    SimContext ctx(cfg, alpha);
    const int n_pts = cfg.grid.n_time_points();
    const int n_chunks = (M + kChunk - 1) / kChunk;

    std::vector<ChunkAccum> parts(static_cast<std::size_t>(n_chunks));
    for (auto& p : parts) p.consumption_sum.assign(static_cast<std::size_t>(n_pts), 0.0);

    parallel_chunks(M, workers, [&](int chunk, int lo, int hi) {
        ChunkAccum& acc = parts[static_cast<std::size_t>(chunk)];
        for (int k = lo; k < hi; ++k) {
            RandomStream rs(seed, static_cast<std::uint64_t>(k));
            StatsRecorder rec{&ctx, &acc, cfg.grid.dt()};
            run_one(ctx, rs, rec);
        }
    });

    // Combine partials in chunk order: the result is independent of workers.
    PopulationStats st;
    st.trajectories = M;
    st.aggregate.assign(static_cast<std::size_t>(n_pts), 0.0);
    long long on0 = 0, samples = 0;
    double run_c = 0.0, sw_c = 0.0, term_c = 0.0;
    double th_min = std::numeric_limits<double>::infinity();
    double th_max = -std::numeric_limits<double>::infinity();
    for (const auto& p : parts) {
        for (int n = 0; n < n_pts; ++n)
            st.aggregate[static_cast<std::size_t>(n)] +=
                p.consumption_sum[static_cast<std::size_t>(n)];
        on0 += p.on_at_start;
        samples += p.samples;
        st.outside_band_fraction += static_cast<double>(p.outside_band);
        st.bound_violations += p.bound_violations;
        st.jump_count += p.jumps;
        run_c += p.running_cost;
        sw_c += p.switch_cost;
        term_c += p.terminal_cost;
        th_min = std::min(th_min, p.theta_min_seen);
        th_max = std::max(th_max, p.theta_max_seen);
    }
    const double inv_m = 1.0 / static_cast<double>(M);
    for (auto& a : st.aggregate) a *= inv_m;
    st.initial_on_fraction = static_cast<double>(on0) * inv_m;
    st.mean_running_cost = run_c * inv_m;
    st.mean_switch_cost = sw_c * inv_m;
    st.mean_terminal_cost = term_c * inv_m;
    st.outside_band_fraction /= static_cast<double>(samples);
    st.theta_min_seen = th_min;
    st.theta_max_seen = th_max;
    return st;
}

std::vector<double> aggregate_consumption(const std::vector<Trajectory>& trajs,
                                          const Grid& g) {
    if (trajs.empty())
        throw std::invalid_argument("aggregate_consumption: empty trajectory list");
    const int n_pts = g.n_time_points();
    std::vector<double> agg(static_cast<std::size_t>(n_pts), 0.0);
    for (const auto& tr : trajs) {
        const std::vector<int> modes = modes_on_grid(tr, g);
        for (int n = 0; n < n_pts; ++n)
            agg[static_cast<std::size_t>(n)] += consumption_p(
                g.time(n), StatePoint{modes[static_cast<std::size_t>(n)],
                                      tr.theta_samples[static_cast<std::size_t>(n)]});
    }
    const double inv_m = 1.0 / static_cast<double>(trajs.size());
    for (auto& a : agg) a *= inv_m;
    return agg;
}

double estimate_cost_JN(const std::vector<Trajectory>& trajs, const ControlField* alpha,
                        const ScenarioConfig& cfg) {
    if (trajs.empty())
        throw std::invalid_argument("estimate_cost_JN: empty trajectory list");
    const Grid& g = cfg.grid;
    const int n_pts = g.n_time_points();
    const double dt = g.dt();
    auto trap_w = [&](int n) { return (n == 0 || n == g.n_t) ? 0.5 * dt : dt; };

    const std::vector<double> agg = aggregate_consumption(trajs, g);

    double coupling = 0.0;
    if (cfg.coupling.kind == CouplingSpec::Kind::Tracking) {
        const std::vector<double> ref = reference_series(cfg);
        for (int n = 0; n < n_pts; ++n) {
            const double e = agg[static_cast<std::size_t>(n)] - ref[static_cast<std::size_t>(n)];
            coupling += trap_w(n) * cfg.coupling.kappa * e * e;
        }
    }

    double mean_g = 0.0;
    for (const auto& tr : trajs) {
        const std::vector<int> modes = modes_on_grid(tr, g);
        double acc = 0.0;
        for (int n = 0; n < n_pts; ++n) {
            const int i = modes[static_cast<std::size_t>(n)];
            const double th = tr.theta_samples[static_cast<std::size_t>(n)];
            double c = running_cost_c(g.time(n), StatePoint{i, th}, cfg);
            if (alpha != nullptr) {
                for (int j = 0; j < g.d; ++j)
                    if (j != i) c += L_value(alpha->rate_at(n, i, j, th), cfg.jump_cost);
            }
            acc += trap_w(n) * c;
        }
        acc += cfg.terminal.value(modes.back());
        mean_g += acc;
    }
    mean_g /= static_cast<double>(trajs.size());

    const double total = coupling + mean_g;
    if (!std::isfinite(total))
        throw NumericError("estimate_cost_JN: non-finite cost estimate");
    return total;
}

} // namespace pdmfc
