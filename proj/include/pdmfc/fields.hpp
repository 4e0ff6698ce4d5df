#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pdmfc/core.hpp"
#include "pdmfc/errors.hpp"

namespace pdmfc {

/// Scalar field tabulated on (time x mode x theta) nodes. Used for the value
/// function and for mode/temperature densities; carries its own geometry so a
/// density may live on a refined theta sub-grid of the originating Grid.
struct ValueField {
    enum class Kind { ValuePhi, Density };

    Kind kind = Kind::ValuePhi;
    int n_time = 0;     ///< time points (steps + 1)
    int d = 0;
    int n_nodes = 0;    ///< theta nodes
    double dt = 0.0;
    double theta_lo = 0.0;
    double dtheta = 0.0;
    std::vector<double> v;

    ValueField() = default;
    ValueField(const Grid& g, Kind kind_, int theta_refine = 1)
        : kind(kind_), n_time(g.n_time_points()), d(g.d),
          n_nodes(g.n_theta * theta_refine + 1), dt(g.dt()), theta_lo(g.theta_lo),
          dtheta(g.dtheta() / theta_refine),
          v(static_cast<std::size_t>(n_time) * d * n_nodes, 0.0) {}

    std::size_t idx(int n, int i, int k) const {
        return (static_cast<std::size_t>(n) * d + i) * n_nodes + k;
    }
    double& at(int n, int i, int k) { return v[idx(n, i, k)]; }
    double at(int n, int i, int k) const { return v[idx(n, i, k)]; }

    double theta(int k) const { return theta_lo + k * dtheta; }
    double time(int n) const { return n * dt; }

    void locate(double th, int& k, double& w) const {
        const double x = (th - theta_lo) / dtheta;
        if (x <= 0.0) { k = 0; w = 0.0; return; }
        if (x >= n_nodes - 1) { k = n_nodes - 2; w = 1.0; return; }
        k = static_cast<int>(x);
        if (k > n_nodes - 2) k = n_nodes - 2;
        w = x - k;
    }

    /// Clamped linear interpolation in theta at fixed time index and mode.
    double interp_theta(int n, int i, double th) const {
        int k; double w;
        locate(th, k, w);
        const std::size_t base = idx(n, i, k);
        return (1.0 - w) * v[base] + w * v[base + 1];
    }

    /// Clamped bilinear interpolation in (t, theta).
    double interp(double t, int i, double th) const {
        double x = t / dt;
        if (x <= 0.0) x = 0.0;
        if (x >= n_time - 1) x = n_time - 1;
        int n = static_cast<int>(x);
        if (n > n_time - 2) n = n_time - 2;
        const double u = x - n;
        return (1.0 - u) * interp_theta(n, i, th) + u * interp_theta(n + 1, i, th);
    }
};

/// Switching-rate field alpha_j(t, i, theta): time x from-mode x to-mode x theta.
/// Admissible controls are nonnegative with zero diagonal (no self-jumps).
struct ControlField {
    int n_time = 0;
    int d = 0;
    int n_nodes = 0;
    double dt = 0.0;
    double theta_lo = 0.0;
    double dtheta = 0.0;
    std::vector<double> v;

    ControlField() = default;
    explicit ControlField(const Grid& g)
        : n_time(g.n_time_points()), d(g.d), n_nodes(g.n_nodes()), dt(g.dt()),
          theta_lo(g.theta_lo), dtheta(g.dtheta()),
          v(static_cast<std::size_t>(n_time) * d * d * n_nodes, 0.0) {}

    std::size_t idx(int n, int i, int j, int k) const {
        return ((static_cast<std::size_t>(n) * d + i) * d + j) * n_nodes + k;
    }
    double& at(int n, int i, int j, int k) { return v[idx(n, i, j, k)]; }
    double at(int n, int i, int j, int k) const { return v[idx(n, i, j, k)]; }

    double theta(int k) const { return theta_lo + k * dtheta; }

    /// Clamped linear interpolation in theta at a grid time index.
    double rate_at(int n, int i, int j, double th) const {
        double x = (th - theta_lo) / dtheta;
        if (x <= 0.0) x = 0.0;
        if (x >= n_nodes - 1) x = n_nodes - 1;
        int k = static_cast<int>(x);
        if (k > n_nodes - 2) k = n_nodes - 2;
        const double w = x - k;
        const std::size_t base = idx(n, i, j, k);
        return (1.0 - w) * v[base] + w * v[base + 1];
    }

    /// Clamped bilinear interpolation in (t, theta).
    double rate_at_time(double t, int i, int j, double th) const {
        double x = t / dt;
        if (x <= 0.0) x = 0.0;
        if (x >= n_time - 1) x = n_time - 1;
        int n = static_cast<int>(x);
        if (n > n_time - 2) n = n_time - 2;
        const double u = x - n;
        return (1.0 - u) * rate_at(n, i, j, th) + u * rate_at(n + 1, i, j, th);
    }

    /// Rejects negative, non-finite, or diagonal rates.
    void validate() const {
        for (int n = 0; n < n_time; ++n)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < n_nodes; ++k) {
                        const double r = at(n, i, j, k);
                        if (!std::isfinite(r))
                            throw NumericError("control field contains non-finite rates");
                        if (r < 0.0)
                            throw NumericError("control field contains negative rates");
                        if (i == j && r != 0.0)
                            throw NumericError("control field has nonzero self-jump rates");
                    }
    }
};

} // namespace pdmfc
