#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pdmfc/core.hpp"

namespace pdmfc {

/// Thermal model of one load. Between jumps the temperature follows
///   dtheta/dt = mode*sigma_p - rho*(theta - theta_amb) - drain(t)*(theta - theta_in),
/// i.e. a linear ODE with piecewise-constant-in-time coefficients.
/// Units: degrees Celsius and hours.
struct DriftModel {
    double sigma_p = 12.0;   ///< heating power while ON, degC/h
    double rho = 0.01;       ///< ambient loss coefficient, 1/h
    double theta_amb = 20.0; ///< ambient temperature, degC
    double theta_in = 15.0;  ///< inlet water temperature, degC
    TimeTable drain = TimeTable::constant(0.015); ///< water-draw coefficient, 1/h
};

/// Deadband safety rates: forced switching intensity near the comfort band edges.
/// Peaks at `peak` on the wrong side of the band and ramps linearly to zero over
/// `ramp_width` inside it; continuous in theta. Only the OFF<->ON pair carries
/// safety rates; the rate is zero for any other (mode, target) pair.
struct SafetyIntensity {
    double theta_min = 50.0;
    double theta_max = 65.0;
    double peak = 12.0;       ///< 1/h; mean dwell past a band edge is 1/peak
    double ramp_width = 1.0;  ///< degC; defaults to one grid cell
};

/// Instantaneous temperature slope at (t, state).
inline double drift(double t, StatePoint s, const DriftModel& dm) {
    const double heat = (s.mode == kOff) ? 0.0 : dm.sigma_p;
    return heat - dm.rho * (s.theta - dm.theta_amb)
                - dm.drain.value_at(t) * (s.theta - dm.theta_in);
}

/// Exact flow step of length h. The drain coefficient is sampled at t and held
/// constant over [t, t+h]; callers must not span a drain knot (grid steps never
/// do, since tables are piecewise constant at grid resolution).
/// Closed form: theta' = theta_eq + (theta - theta_eq) * exp(-b*h) with
/// b = rho + drain, theta_eq the mode equilibrium; reduces to
/// theta + mode*sigma_p*h when b = 0.
inline double advance_flow(double t, StatePoint s, double h, const DriftModel& dm) {
    const double eps = dm.drain.value_at(t);
    const double b = dm.rho + eps;
    const double heat = (s.mode == kOff) ? 0.0 : dm.sigma_p;
    if (b <= 0.0) return s.theta + heat * h;
    const double theta_eq = (heat + dm.rho * dm.theta_amb + eps * dm.theta_in) / b;
    return theta_eq + (s.theta - theta_eq) * std::exp(-b * h);
}

/// Safety intensity toward target mode j. Zero on the diagonal.
inline double hat_alpha(double /*t*/, StatePoint s, int j, const SafetyIntensity& si) {
    if (s.mode == kOn && j == kOff) {
        if (s.theta >= si.theta_max) return si.peak;
        const double edge = si.theta_max - si.ramp_width;
        if (s.theta > edge) return si.peak * (s.theta - edge) / si.ramp_width;
        return 0.0;
    }
    if (s.mode == kOff && j == kOn) {
        if (s.theta <= si.theta_min) return si.peak;
        const double edge = si.theta_min + si.ramp_width;
        if (s.theta < edge) return si.peak * (edge - s.theta) / si.ramp_width;
        return 0.0;
    }
    return 0.0;
}

/// Normalized power draw of a state: 1 when heating, 0 when idle.
inline double consumption_p(double /*t*/, StatePoint s) {
    return s.mode == kOff ? 0.0 : 1.0;
}

/// Almost-sure temperature bounds of the flow started inside the comfort band:
/// theta can never cool below min(theta_in, theta_amb, theta_min) nor heat above
/// the largest ON equilibrium across drain values.
inline void derived_theta_bounds(const DriftModel& dm, const SafetyIntensity& si,
                                 double& theta_0, double& theta_inf) {
    theta_0 = std::min({dm.theta_in, dm.theta_amb, si.theta_min});
    theta_inf = si.theta_max;
    for (double eps : dm.drain.values()) {
        const double b = dm.rho + eps;
        if (b <= 0.0) { theta_inf = std::numeric_limits<double>::infinity(); continue; }
        const double eq = (dm.sigma_p + dm.rho * dm.theta_amb + eps * dm.theta_in) / b;
        theta_inf = std::max(theta_inf, eq);
    }
}

/// Per-step flow coefficients pre-resolved on the time grid so hot loops avoid
/// table lookups and exp() calls: theta' = theta_eq[n][mode] + (theta -
/// theta_eq[n][mode]) * decay[n], or theta + mode*sigma_p*dt when b == 0.
class FlowTables {
public:
    FlowTables() = default;
    FlowTables(const Grid& g, const DriftModel& dm) : dt_(g.dt()), d_(g.d) {
        theta_eq_.resize(static_cast<std::size_t>(g.n_t) * g.d, 0.0);
        decay_.resize(g.n_t, 1.0);
        b_zero_.resize(g.n_t, false);
        heat_.resize(g.d, 0.0);
        for (int i = 1; i < g.d; ++i) heat_[i] = dm.sigma_p;
        for (int n = 0; n < g.n_t; ++n) {
            const double eps = dm.drain.value_at(g.time(n));
            const double b = dm.rho + eps;
            if (b <= 0.0) { b_zero_[n] = true; continue; }
            decay_[n] = std::exp(-b * dt_);
            for (int i = 0; i < g.d; ++i)
                theta_eq_[static_cast<std::size_t>(n) * g.d + i] =
                    (heat_[i] + dm.rho * dm.theta_amb + eps * dm.theta_in) / b;
        }
    }

    double advance(int n, int mode, double theta) const {
        if (b_zero_[n]) return theta + heat_[mode] * dt_;
        const double eq = theta_eq_[static_cast<std::size_t>(n) * d_ + mode];
        return eq + (theta - eq) * decay_[n];
    }

private:
    double dt_ = 0.0;
    int d_ = 0;
    std::vector<double> theta_eq_;
    std::vector<double> decay_;
    std::vector<char> b_zero_;
    std::vector<double> heat_;
};

} // namespace pdmfc
