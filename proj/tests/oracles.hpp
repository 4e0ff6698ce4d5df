#pragma once

// Independent reference implementations the tests compare the library against.
// Everything here is deliberately written from the model definition, not from
// the library's closed forms, and favors clarity over speed.

#include <cmath>
#include <vector>

#include "pdmfc/config.hpp"
#include "pdmfc/core.hpp"
#include "pdmfc/dynamics.hpp"
#include "pdmfc/fields.hpp"

namespace oracles {

/// Classic RK4 on dtheta/dt = drift(t, theta) with `substeps` stages across h.
/// The drain coefficient is sampled at the segment start, matching the
/// piecewise-constant convention of the library's exact step.
inline double rk4_flow(double t, pdmfc::StatePoint s, double h,
                       const pdmfc::DriftModel& dm, int substeps = 256) {
    const double eps = dm.drain.value_at(t);
    const double heat = (s.mode == pdmfc::kOff) ? 0.0 : dm.sigma_p;
    auto f = [&](double theta) {
        return heat - dm.rho * (theta - dm.theta_amb) - eps * (theta - dm.theta_in);
    };
    double theta = s.theta;
    const double dh = h / substeps;
    for (int i = 0; i < substeps; ++i) {
        const double k1 = f(theta);
        const double k2 = f(theta + 0.5 * dh * k1);
        const double k3 = f(theta + 0.5 * dh * k2);
        const double k4 = f(theta + dh * k3);
        theta += dh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return theta;
}

/// Trapezoid quadrature of a sampled series on [0, T].
inline double trapezoid(const std::vector<double>& y, double dt) {
    double acc = 0.0;
    for (std::size_t n = 0; n + 1 < y.size(); ++n) acc += 0.5 * dt * (y[n] + y[n + 1]);
    return acc;
}

/// Pointwise residual of the backward equation measured along characteristics:
/// for an interior probe (t_n, i, theta) compare the solved phi against one
/// exact continuous-time step of length dt rebuilt by midpoint quadrature with
/// `substeps` slices, interpolating phi(t_{n+1}, ., .) where needed. First
/// order in (dt, dtheta) for smooth data, so halving both should halve it.
inline double backward_residual(const pdmfc::ValueField& phi,
                                const std::vector<double>& lambda,
                                const pdmfc::ScenarioConfig& cfg, int n, int i,
                                double theta, int substeps = 4) {
    const pdmfc::Grid& g = cfg.grid;
    const double dt = g.dt();
    const double t_n = g.time(n);

    // Integrate running terms along the exact flow with midpoint slices.
    const double dh = dt / substeps;
    double acc = 0.0;
    for (int ss = 0; ss < substeps; ++ss) {
        const double tm = t_n + (ss + 0.5) * dh;
        const double th_m = rk4_flow(t_n, {i, theta}, (ss + 0.5) * dh, cfg.drift);
        const pdmfc::StatePoint sp{i, th_m};
        double slice = pdmfc::running_cost_c(tm, sp, cfg) +
                       pdmfc::consumption_p(tm, sp) * lambda[static_cast<std::size_t>(n)];
        for (int j = 0; j < g.d; ++j) {
            if (j == i) continue;
            const double to_j = phi.interp(tm, j, th_m);
            const double own = phi.interp(tm, i, th_m);
            const double diff = own - to_j;
            slice -= pdmfc::H_value(diff, cfg.jump_cost);
            slice += pdmfc::hat_alpha(tm, sp, j, cfg.safety) * (to_j - own);
        }
        acc += dh * slice;
    }
    const double th_end = rk4_flow(t_n, {i, theta}, dt, cfg.drift);
    const double expected = phi.interp_theta(n + 1, i, th_end) + acc;
    return phi.interp_theta(n, i, theta) - expected;
}

} // namespace oracles
