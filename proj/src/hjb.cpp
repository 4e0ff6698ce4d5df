#include "pdmfc/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pdmfc/dynamics.hpp"
#include "pdmfc/errors.hpp"

namespace pdmfc {

CflReport cfl_check(const ScenarioConfig& cfg, double alpha_bound) {
    CflReport rep;
    rep.max_drift = max_abs_drift(cfg);
    const double dt = cfg.grid.dt();
    rep.transport_ratio = rep.max_drift * dt / cfg.grid.dtheta();
    // Worst total intensity out of one mode: every foreign mode at the control
    // bound plus the safety peak (safety acts toward at most one target).
    rep.jump_ratio = dt * (static_cast<double>(cfg.grid.d - 1) * alpha_bound
                           + cfg.safety.peak);
    rep.passed = rep.transport_ratio <= 1.0 + 1e-12 && rep.jump_ratio <= 1.0 + 1e-12;
    return rep;
}

double apriori_alpha_bound(const ScenarioConfig& cfg, const SolverSettings& s) {
    const std::vector<double> zeros(
        static_cast<std::size_t>(cfg.grid.n_time_points()), 0.0);
    const ValueField phi = solve_phi(zeros, cfg, s);
    double m = 0.0;
    for (double x : phi.v) m = std::max(m, std::abs(x));
    return H_prime(2.0 * m, cfg.jump_cost);
}

ValueField solve_phi(const std::vector<double>& lambda, const ScenarioConfig& cfg,
                     const SolverSettings& s) {
    const Grid& g = cfg.grid;
    if (static_cast<int>(lambda.size()) < g.n_time_points())
        throw std::invalid_argument("solve_phi: lambda must cover every time point");

    ValueField phi(g, ValueField::Kind::ValuePhi);
    const FlowTables flow(g, cfg.drift);
    const int d = g.d;
    const int nk = g.n_nodes();

    for (int i = 0; i < d; ++i)
        for (int k = 0; k < nk; ++k)
            phi.at(g.n_t, i, k) = cfg.terminal.value(i);

    const double dt = g.dt();
    std::vector<double> reach(static_cast<std::size_t>(d), 0.0);
    for (int n = g.n_t - 1; n >= 0; --n) {
        const double t = g.time(n);
        const double lam = lambda[static_cast<std::size_t>(n)];
        for (int i = 0; i < d; ++i) {
            for (int k = 0; k < nk; ++k) {
                const double th = g.theta(k);
                const double th_next = flow.advance(n, i, th);
                for (int m = 0; m < d; ++m)
                    reach[static_cast<std::size_t>(m)] = phi.interp_theta(n + 1, m, th_next);

                const StatePoint sp{i, th};
                double rhs = running_cost_c(t, sp, cfg)
                           + consumption_p(t, sp) * lam;
                const double own = reach[static_cast<std::size_t>(i)];
                for (int j = 0; j < d; ++j) {
                    if (j == i) continue;
                    const double diff = own - reach[static_cast<std::size_t>(j)];
                    rhs -= H_value(diff, cfg.jump_cost);
                    rhs += hat_alpha(t, sp, j, cfg.safety) * (-diff);
                }
                const double val = own + dt * rhs;
                if (!std::isfinite(val) || std::abs(val) > s.phi_guard)
                    throw NumericError("value sweep diverged past the guard bound");
                phi.at(n, i, k) = val;
            }
        }
    }
    return phi;
}

ControlField extract_control(const ValueField& phi, const ScenarioConfig& cfg) {
    const Grid& g = cfg.grid;
    if (phi.n_time != g.n_time_points() || phi.d != g.d || phi.n_nodes != g.n_nodes())
        throw std::invalid_argument("extract_control: value field does not match the grid");

    ControlField alpha(g);
    const FlowTables flow(g, cfg.drift);
    const int d = g.d;
    const int nk = g.n_nodes();
    const double dt = g.dt();
    std::vector<double> reach(static_cast<std::size_t>(d), 0.0);
    double worst_total = 0.0;

    for (int n = 0; n < g.n_t; ++n) {
        const double t = g.time(n);
        for (int i = 0; i < d; ++i) {
            for (int k = 0; k < nk; ++k) {
                const double th = g.theta(k);
                const double th_next = flow.advance(n, i, th);
                for (int m = 0; m < d; ++m)
                    reach[static_cast<std::size_t>(m)] = phi.interp_theta(n + 1, m, th_next);
                const double own = reach[static_cast<std::size_t>(i)];
                double total = 0.0;
                for (int j = 0; j < d; ++j) {
                    if (j == i) continue;
                    const double a =
                        H_prime(own - reach[static_cast<std::size_t>(j)], cfg.jump_cost);
                    alpha.at(n, i, j, k) = a;
                    total += a + hat_alpha(t, StatePoint{i, th}, j, cfg.safety);
                }
                worst_total = std::max(worst_total, total);
            }
        }
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < nk; ++k)
                alpha.at(g.n_t, i, j, k) = alpha.at(g.n_t - 1, i, j, k);

    if (dt * worst_total > 1.0 + 1e-12)
        throw NumericError(
            "extracted control breaks the per-step probability bound; "
            "refine the time step or rescale the problem");
    return alpha;
}

ValueField forward_density(const ControlField* alpha, const ScenarioConfig& cfg,
                           const SolverSettings& s) {
    const Grid& g = cfg.grid;
    if (s.theta_refine < 1)
        throw std::invalid_argument("forward_density: theta_refine must be >= 1");
    if (alpha != nullptr &&
        (alpha->n_time != g.n_time_points() || alpha->d != g.d ||
         alpha->n_nodes != g.n_nodes()))
        throw std::invalid_argument("forward_density: control field does not match the grid");
    if (alpha != nullptr) alpha->validate();

    ValueField m(g, ValueField::Kind::Density, s.theta_refine);
    const FlowTables flow(g, cfg.drift);
    const int d = g.d;
    const int nk = m.n_nodes;
    const double dt = g.dt();
    const double h = m.dtheta;

    // Initial law: temperature uniform on the comfort band, mode Bernoulli.
    // Each node owns the cell [theta_k - h/2, theta_k + h/2]; its weight is the
    // cell's overlap with the band, so the weights sum to the band width exactly.
    {
        const double lo = cfg.safety.theta_min;
        const double hi = cfg.safety.theta_max;
        const double span = hi - lo;
        const double p_on = cfg.initial.on_probability;
        for (int k = 0; k < nk; ++k) {
            const double c_lo = m.theta(k) - 0.5 * h;
            const double c_hi = m.theta(k) + 0.5 * h;
            const double overlap =
                std::max(0.0, std::min(c_hi, hi) - std::max(c_lo, lo));
            if (overlap <= 0.0) continue;
            const double w = overlap / span;
            m.at(0, kOff, k) = w * (1.0 - p_on);
            m.at(0, kOn, k) = w * p_on;
        }
    }

    // On the unrefined grid, control nodes and density nodes coincide: read the
    // stored rate directly so the step is the exact adjoint of the value sweep.
    const bool aligned = (s.theta_refine == 1);

    std::vector<double> q(static_cast<std::size_t>(d), 0.0);
    for (int n = 0; n < g.n_t; ++n) {
        const double t = g.time(n);
        for (int i = 0; i < d; ++i) {
            for (int k = 0; k < nk; ++k) {
                const double mass = m.at(n, i, k);
                if (mass == 0.0) continue;
                const double th = m.theta(k);

                double q_move = 0.0;
                for (int j = 0; j < d; ++j) {
                    if (j == i) { q[static_cast<std::size_t>(j)] = 0.0; continue; }
                    const double a = alpha == nullptr ? 0.0
                                   : aligned ? alpha->at(n, i, j, k)
                                             : alpha->rate_at(n, i, j, th);
                    const double rate = a + hat_alpha(t, StatePoint{i, th}, j, cfg.safety);
                    q[static_cast<std::size_t>(j)] = dt * rate;
                    q_move += dt * rate;
                }
                double q_stay = 1.0 - q_move;
                if (q_stay < -1e-12)
                    throw NumericError("forward density lost positivity; "
                                       "per-step jump probability exceeds one");
                if (q_stay < 0.0) q_stay = 0.0;

                const double th_next = flow.advance(n, i, th);
                int kk; double w;
                m.locate(th_next, kk, w);
                m.at(n + 1, i, kk) += mass * q_stay * (1.0 - w);
                m.at(n + 1, i, kk + 1) += mass * q_stay * w;
                for (int j = 0; j < d; ++j) {
                    if (j == i || q[static_cast<std::size_t>(j)] == 0.0) continue;
                    const double moved = mass * q[static_cast<std::size_t>(j)];
                    m.at(n + 1, j, kk) += moved * (1.0 - w);
                    m.at(n + 1, j, kk + 1) += moved * w;
                }
            }
        }
        double total = 0.0;
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < nk; ++k) total += m.at(n + 1, i, k);
        if (std::abs(total - 1.0) > 1e-10)
            throw NumericError("forward density stopped conserving mass");
    }
    return m;
}

std::vector<double> expected_consumption(const ValueField& density) {
    std::vector<double> out(static_cast<std::size_t>(density.n_time), 0.0);
    for (int n = 0; n < density.n_time; ++n) {
        double acc = 0.0;
        for (int i = 1; i < density.d; ++i)
            for (int k = 0; k < density.n_nodes; ++k) acc += density.at(n, i, k);
        out[static_cast<std::size_t>(n)] = acc;
    }
    return out;
}

} // namespace pdmfc
