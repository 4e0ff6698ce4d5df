#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "pdmfc/errors.hpp"

namespace pdmfc {

// Mode indices. Modes are 0..d-1; the two-mode scenarios use OFF=0, ON=1.
inline constexpr int kOff = 0;
inline constexpr int kOn = 1;

/// Hybrid state of one load: discrete mode plus continuous temperature (Celsius).
struct StatePoint {
    int mode = kOff;
    double theta = 0.0;
};

/// Time × temperature discretization shared by the solver, the simulator and the
/// density transport. Time is measured in hours throughout the library.
///
/// Invariants: n_t >= 1, n_theta >= 1, theta_lo < theta_hi, d >= 1.
/// (Scenario configs additionally require d >= 2; see validate_config.)
struct Grid {
    double horizon_h = 24.0; ///< [0, T]
    int n_t = 720;           ///< number of time steps; n_t + 1 grid points
    double theta_lo = 42.0;
    double theta_hi = 70.0;
    int n_theta = 28;        ///< number of theta cells; n_theta + 1 nodes
    int d = 2;               ///< number of modes

    double dt() const { return horizon_h / n_t; }
    double dtheta() const { return (theta_hi - theta_lo) / n_theta; }
    int n_time_points() const { return n_t + 1; }
    int n_nodes() const { return n_theta + 1; }
    double time(int n) const { return n * dt(); }
    double theta(int k) const { return theta_lo + k * dtheta(); }

    double clamp_theta(double th) const {
        if (th < theta_lo) return theta_lo;
        if (th > theta_hi) return theta_hi;
        return th;
    }

    /// Bracketing node and linear weight for clamped interpolation:
    /// theta ~ (1-w)*node(k) + w*node(k+1), 0 <= k <= n_theta-1, w in [0,1].
    void locate(double th, int& k, double& w) const {
        const double x = (th - theta_lo) / dtheta();
        if (x <= 0.0) { k = 0; w = 0.0; return; }
        if (x >= n_theta) { k = n_theta - 1; w = 1.0; return; }
        k = static_cast<int>(x);
        if (k > n_theta - 1) k = n_theta - 1;
        w = x - k;
    }
};

/// Piecewise-constant table over time: value(t) is the entry of the last knot <= t,
/// and the first entry before the first knot. Knots are hours, strictly increasing.
class TimeTable {
public:
    TimeTable() = default;
    TimeTable(std::vector<double> knots, std::vector<double> values)
        : knots_(std::move(knots)), values_(std::move(values)) {}

    static TimeTable constant(double v) { return TimeTable({0.0}, {v}); }

    bool empty() const { return values_.empty(); }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }

    double value_at(double t) const {
        // Linear scan is fine: tables are tiny and hot paths pre-sample per step.
        std::size_t idx = 0;
        for (std::size_t i = 0; i < knots_.size(); ++i) {
            if (knots_[i] <= t) idx = i; else break;
        }
        return values_[idx];
    }

    double max_value() const {
        double m = -std::numeric_limits<double>::infinity();
        for (double v : values_) m = std::max(m, v);
        return m;
    }
    double min_value() const {
        double m = std::numeric_limits<double>::infinity();
        for (double v : values_) m = std::min(m, v);
        return m;
    }

    /// Sampled on grid step starts: out[n] = value_at(t_n), n = 0..n_t.
    std::vector<double> sample(const Grid& g) const {
        std::vector<double> out(g.n_time_points());
        for (int n = 0; n < g.n_time_points(); ++n) out[n] = value_at(g.time(n));
        return out;
    }

    bool well_formed() const {
        if (values_.empty() || knots_.size() != values_.size()) return false;
        for (std::size_t i = 1; i < knots_.size(); ++i)
            if (!(knots_[i] > knots_[i - 1])) return false;
        return true;
    }

private:
    std::vector<double> knots_;
    std::vector<double> values_;
};

/// Switching-cost model. The jump cost L is l on [0,inf), 0 at 0 and +inf on
/// (-inf,0); its convex conjugate restricted to admissible rates is
/// H(x) = sup_{y>=0} (x*y - l(y)), with maximizer H'(x).
/// The default l(y) = y^2/2 gives H(x) = max(x,0)^2/2 and H'(x) = max(x,0).
/// A custom l must supply all four callables, with l strictly convex,
/// increasing, l(0) = 0 and superlinear.
struct JumpCost {
    enum class Kind { Quadratic, Custom };
    Kind kind = Kind::Quadratic;
    std::function<double(double)> l;       // custom only
    std::function<double(double)> l_prime; // custom only
    std::function<double(double)> h;       // custom only
    std::function<double(double)> h_prime; // custom only
};

/// Conjugate value H(x); 0 for x <= 0 in the quadratic case.
inline double H_value(double x, const JumpCost& jc) {
    if (jc.kind == JumpCost::Kind::Quadratic) {
        const double y = x > 0.0 ? x : 0.0;
        return y * y / 2.0;
    }
    return jc.h(x);
}

/// Maximizing rate H'(x) = argmax_{y>=0} (x*y - l(y)).
inline double H_prime(double x, const JumpCost& jc) {
    if (jc.kind == JumpCost::Kind::Quadratic) return x > 0.0 ? x : 0.0;
    return jc.h_prime(x);
}

/// Jump cost of a rate: L(y) = l(y) for y > 0, 0 at y = 0, +inf for y < 0.
inline double L_value(double y, const JumpCost& jc) {
    if (y < 0.0) return std::numeric_limits<double>::infinity();
    if (y == 0.0) return 0.0;
    if (jc.kind == JumpCost::Kind::Quadratic) return y * y / 2.0;
    return jc.l(y);
}

/// One failed validation rule: offending field plus a human-readable condition.
struct Violation {
    std::string field;
    std::string message;
};

} // namespace pdmfc
