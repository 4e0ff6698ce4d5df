#include "doctest.h"

#include <cmath>
#include <limits>

#include "pdmfc/config.hpp"
#include "pdmfc/config_io.hpp"
#include "pdmfc/core.hpp"

using namespace pdmfc;

TEST_CASE("quadratic switching cost: conjugate values and slopes") {
    JumpCost jc; // quadratic by default

    CHECK_EQ(H_value(2.0, jc), doctest::Approx(2.0));
    CHECK_EQ(H_prime(0.7, jc), doctest::Approx(0.7));
    CHECK_EQ(H_value(0.0, jc), 0.0);
    CHECK_EQ(H_value(-1.5, jc), 0.0);
    CHECK_EQ(H_prime(-3.0, jc), 0.0);

    CHECK_EQ(L_value(0.0, jc), 0.0);
    CHECK_EQ(L_value(2.0, jc), doctest::Approx(2.0));
    CHECK(std::isinf(L_value(-1.0, jc)));
    CHECK(L_value(-1e-300, jc) > 0.0); // any negative rate is forbidden
}

TEST_CASE("conjugacy holds exactly at the maximizer") {
    JumpCost jc;
    for (double x : {0.3, 1.0, 2.5, 7.0, 31.25}) {
        const double y = H_prime(x, jc);
        // x*y - L(y) == H(y') at the argmax; exact in IEEE for the quadratic
        // pair because both sides reduce to the same product halved.
        CHECK_EQ(x * y - L_value(y, jc), H_value(x, jc));
    }
}

TEST_CASE("H_prime is the derivative of H") {
    JumpCost jc;
    const double h = 1e-6;
    for (double x : {0.5, 1.7, 4.0}) {
        const double fd = (H_value(x + h, jc) - H_value(x - h, jc)) / (2.0 * h);
        CHECK(std::abs(fd - H_prime(x, jc)) < 1e-5);
    }
}

TEST_CASE("custom switching-cost callables are routed") {
    // l(y) = y^2 (twice the default), so H(x) = x^2/4 and H'(x) = x/2.
    JumpCost jc;
    jc.kind = JumpCost::Kind::Custom;
    jc.l = [](double y) { return y * y; };
    jc.l_prime = [](double y) { return 2.0 * y; };
    jc.h = [](double x) { return x > 0.0 ? x * x / 4.0 : 0.0; };
    jc.h_prime = [](double x) { return x > 0.0 ? x / 2.0 : 0.0; };

    CHECK_EQ(H_value(2.0, jc), doctest::Approx(1.0));
    CHECK_EQ(H_prime(2.0, jc), doctest::Approx(1.0));
    CHECK_EQ(L_value(3.0, jc), doctest::Approx(9.0));
    CHECK_EQ(L_value(0.0, jc), 0.0);
    CHECK(std::isinf(L_value(-2.0, jc)));
}

TEST_CASE("piecewise-constant tables") {
    const TimeTable t({0.0, 7.0, 8.0}, {0.1, 0.4, 0.1});
    CHECK_EQ(t.value_at(0.0), 0.1);
    CHECK_EQ(t.value_at(6.999), 0.1);
    CHECK_EQ(t.value_at(7.0), 0.4);
    CHECK_EQ(t.value_at(7.5), 0.4);
    CHECK_EQ(t.value_at(8.0), 0.1);
    CHECK_EQ(t.value_at(23.0), 0.1);
    CHECK_EQ(t.value_at(-1.0), 0.1); // before the first knot: first value
    CHECK_EQ(t.max_value(), 0.4);
    CHECK_EQ(t.min_value(), 0.1);
    CHECK(t.well_formed());

    CHECK_EQ(TimeTable::constant(3.0).value_at(12.0), 3.0);

    CHECK_FALSE(TimeTable().well_formed());
    CHECK_FALSE(TimeTable({0.0, 0.0}, {1.0, 2.0}).well_formed());   // flat knots
    CHECK_FALSE(TimeTable({1.0, 0.5}, {1.0, 2.0}).well_formed());   // decreasing
    CHECK_FALSE(TimeTable({0.0}, {1.0, 2.0}).well_formed());        // ragged

    Grid g;
    g.horizon_h = 10.0;
    g.n_t = 10;
    const auto s = TimeTable({0.0, 2.0}, {1.0, 5.0}).sample(g);
    REQUIRE_EQ(s.size(), 11);
    CHECK_EQ(s[0], 1.0);
    CHECK_EQ(s[1], 1.0);
    CHECK_EQ(s[2], 5.0);
    CHECK_EQ(s[10], 5.0);
}

TEST_CASE("grid geometry and interpolation brackets") {
    Grid g; // defaults: [0,24]h x [42,70]C, 720 x 28 cells
    CHECK_EQ(g.dt(), doctest::Approx(24.0 / 720.0));
    CHECK_EQ(g.dtheta(), doctest::Approx(1.0));
    CHECK_EQ(g.n_time_points(), 721);
    CHECK_EQ(g.n_nodes(), 29);
    CHECK_EQ(g.theta(0), 42.0);
    CHECK_EQ(g.theta(28), 70.0);

    int k;
    double w;
    g.locate(41.0, k, w); // below range clamps to the first node
    CHECK_EQ(k, 0);
    CHECK_EQ(w, 0.0);
    g.locate(71.0, k, w); // above range clamps to the last node
    CHECK_EQ(k, 27);
    CHECK_EQ(w, 1.0);
    g.locate(44.25, k, w);
    CHECK_EQ(k, 2);
    CHECK_EQ(w, doctest::Approx(0.25));
    CHECK_EQ(g.clamp_theta(100.0), 70.0);
    CHECK_EQ(g.clamp_theta(-100.0), 42.0);
    CHECK_EQ(g.clamp_theta(50.5), 50.5);
}

namespace {

bool flags_field(const std::vector<Violation>& v, const std::string& field) {
    for (const auto& p : v)
        if (p.field == field) return true;
    return false;
}

} // namespace

TEST_CASE("default config validates cleanly") {
    const ScenarioConfig cfg = default_config();
    const auto v = validate_config(cfg);
    for (const auto& p : v) MESSAGE(p.field, ": ", p.message);
    CHECK(v.empty());
}

TEST_CASE("validation flags structural problems") {
    ScenarioConfig cfg = default_config();
    cfg.safety.theta_min = 66.0; // above theta_max
    CHECK(flags_field(validate_config(cfg), "bounds.theta_min"));

    cfg = default_config();
    cfg.grid.d = 1;
    CHECK(flags_field(validate_config(cfg), "grid.n_modes"));
    cfg.grid.d = 17;
    CHECK(flags_field(validate_config(cfg), "grid.n_modes"));

    cfg = default_config();
    cfg.initial.on_probability = 1.5;
    CHECK_FALSE(validate_config(cfg).empty());

    cfg = default_config();
    cfg.drift.drain = TimeTable({0.0, 0.0}, {0.1, 0.1});
    CHECK(flags_field(validate_config(cfg), "physics.drain"));

    cfg = default_config();
    cfg.coupling.kind = CouplingSpec::Kind::Tracking;
    cfg.coupling.kappa = 0.0;
    CHECK_FALSE(validate_config(cfg).empty());
}

TEST_CASE("validation flags step-size violations") {
    // One-hour steps: the drift alone moves several cells per step, and the
    // safety peak alone gives dt * peak = 12.
    ScenarioConfig cfg = default_config();
    cfg.grid.n_t = 24;
    const auto v = validate_config(cfg);
    CHECK_FALSE(v.empty());
    bool mentions_step = false;
    for (const auto& p : v)
        if (p.message.find("step") != std::string::npos) mentions_step = true;
    CHECK(mentions_step);
}

TEST_CASE("tracking reference resolution") {
    ScenarioConfig cfg = default_config();
    cfg.coupling.kind = CouplingSpec::Kind::Tracking;
    cfg.coupling.use_nominal_mean = true;
    CHECK_THROWS_AS((void)reference_series(cfg), ConfigError);

    resolve_reference(cfg, 0.42);
    const auto r = reference_series(cfg);
    REQUIRE_EQ(static_cast<int>(r.size()), cfg.grid.n_time_points());
    CHECK_EQ(r.front(), 0.42);
    CHECK_EQ(r.back(), 0.42);
    CHECK_FALSE(cfg.coupling.use_nominal_mean);

    cfg.coupling.kind = CouplingSpec::Kind::None;
    CHECK_THROWS_AS((void)reference_series(cfg), ConfigError);
}

TEST_CASE("running cost selector") {
    ScenarioConfig cfg = default_config();
    CHECK_EQ(running_cost_c(1.0, {kOn, 55.0}, cfg), 0.0); // no running cost

    cfg.running.kind = RunningSpec::Kind::Price;
    cfg.running.price = TimeTable({0.0, 8.0, 20.0}, {1.0, 5.0, 1.0});
    CHECK_EQ(running_cost_c(9.0, {kOn, 55.0}, cfg), 5.0);
    CHECK_EQ(running_cost_c(9.0, {kOff, 55.0}, cfg), 0.0);
    CHECK_EQ(running_cost_c(21.0, {kOn, 55.0}, cfg), 1.0);

    cfg.running.kind = RunningSpec::Kind::Custom;
    cfg.running.custom = [](double t, StatePoint s) { return t + s.theta; };
    CHECK_EQ(running_cost_c(2.0, {kOff, 40.0}, cfg), 42.0);
}

TEST_CASE("max_abs_drift covers the drain peaks") {
    const ScenarioConfig cfg = default_config();
    // Largest pull: ON mode, coldest corner, overnight drain:
    // |12 - rho*(42-20) - 0.003*(42-15)| = 12 - 0.22 - 0.081.
    CHECK_EQ(max_abs_drift(cfg), doctest::Approx(11.699));
}
