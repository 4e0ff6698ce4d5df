#include "pdmfc/config_io.hpp"

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"

#include "pdmfc/csv.hpp"
#include "pdmfc/errors.hpp"

namespace pdmfc {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw ConfigError(where + ": " + msg);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* a : allowed)
            if (it.key() == a) { known = true; break; }
        if (!known) fail(where, "unknown key '" + it.key() + "'");
    }
}

const json& member(const json& j, const char* key) { return j.at(key); }
bool has(const json& j, const char* key) { return j.contains(key); }

double as_num(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<int>();
}

std::uint64_t as_seed(const json& j, const std::string& where) {
    if (!j.is_number_integer() || (j.is_number_integer() && j.get<long long>() < 0))
        fail(where, "expected a nonnegative integer");
    return j.get<std::uint64_t>();
}

std::string as_str(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected a string");
    return j.get<std::string>();
}

TimeTable as_table(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        fail(where, "expected a nonempty array of [hour, value] pairs");
    std::vector<double> knots, values;
    knots.reserve(j.size());
    values.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& row = j[i];
        const std::string spot = where + "[" + std::to_string(i) + "]";
        if (!row.is_array() || row.size() != 2)
            fail(spot, "expected an [hour, value] pair");
        knots.push_back(as_num(row[0], spot));
        values.push_back(as_num(row[1], spot));
    }
    TimeTable t(std::move(knots), std::move(values));
    if (!t.well_formed()) fail(where, "hours must be strictly increasing");
    return t;
}

json table_json(const TimeTable& t) {
    json out = json::array();
    for (std::size_t i = 0; i < t.size(); ++i)
        out.push_back(json::array({t.knots()[i], t.values()[i]}));
    return out;
}

void parse_grid(const json& j, const std::string& where, Grid& g) {
    check_keys(j, where, {"horizon_h", "steps", "theta_lo_C", "theta_hi_C",
                          "theta_cells", "modes"});
    if (has(j, "horizon_h")) g.horizon_h = as_num(member(j, "horizon_h"), where + ".horizon_h");
    if (has(j, "steps")) g.n_t = as_int(member(j, "steps"), where + ".steps");
    if (has(j, "theta_lo_C")) g.theta_lo = as_num(member(j, "theta_lo_C"), where + ".theta_lo_C");
    if (has(j, "theta_hi_C")) g.theta_hi = as_num(member(j, "theta_hi_C"), where + ".theta_hi_C");
    if (has(j, "theta_cells")) g.n_theta = as_int(member(j, "theta_cells"), where + ".theta_cells");
    if (has(j, "modes")) g.d = as_int(member(j, "modes"), where + ".modes");
}

void parse_physics(const json& j, const std::string& where, DriftModel& dm) {
    check_keys(j, where, {"sigma_p_C_per_h", "rho_per_h", "theta_amb_C", "theta_in_C",
                          "drain_per_h"});
    if (has(j, "sigma_p_C_per_h"))
        dm.sigma_p = as_num(member(j, "sigma_p_C_per_h"), where + ".sigma_p_C_per_h");
    if (has(j, "rho_per_h")) dm.rho = as_num(member(j, "rho_per_h"), where + ".rho_per_h");
    if (has(j, "theta_amb_C"))
        dm.theta_amb = as_num(member(j, "theta_amb_C"), where + ".theta_amb_C");
    if (has(j, "theta_in_C"))
        dm.theta_in = as_num(member(j, "theta_in_C"), where + ".theta_in_C");
    if (has(j, "drain_per_h"))
        dm.drain = as_table(member(j, "drain_per_h"), where + ".drain_per_h");
}

void parse_bounds(const json& j, const std::string& where, SafetyIntensity& si) {
    check_keys(j, where, {"theta_min_C", "theta_max_C", "safety_peak_per_h", "ramp_width_C"});
    if (has(j, "theta_min_C"))
        si.theta_min = as_num(member(j, "theta_min_C"), where + ".theta_min_C");
    if (has(j, "theta_max_C"))
        si.theta_max = as_num(member(j, "theta_max_C"), where + ".theta_max_C");
    if (has(j, "safety_peak_per_h"))
        si.peak = as_num(member(j, "safety_peak_per_h"), where + ".safety_peak_per_h");
    if (has(j, "ramp_width_C"))
        si.ramp_width = as_num(member(j, "ramp_width_C"), where + ".ramp_width_C");
}

void parse_coupling(const json& j, const std::string& where, CouplingSpec& c) {
    check_keys(j, where, {"kind", "kappa", "reference"});
    if (has(j, "kind")) {
        const std::string kind = as_str(member(j, "kind"), where + ".kind");
        if (kind == "none") c.kind = CouplingSpec::Kind::None;
        else if (kind == "tracking") c.kind = CouplingSpec::Kind::Tracking;
        else fail(where + ".kind", "expected 'none' or 'tracking', got '" + kind + "'");
    }
    if (has(j, "kappa")) c.kappa = as_num(member(j, "kappa"), where + ".kappa");
    if (has(j, "reference")) {
        const json& r = member(j, "reference");
        if (r.is_string()) {
            const std::string s = r.get<std::string>();
            if (s != "nominal-mean")
                fail(where + ".reference",
                     "expected a table or the string 'nominal-mean', got '" + s + "'");
            c.use_nominal_mean = true;
            c.reference = TimeTable();
        } else {
            c.reference = as_table(r, where + ".reference");
            c.use_nominal_mean = false;
        }
    }
}

void parse_running(const json& j, const std::string& where, RunningSpec& r) {
    check_keys(j, where, {"kind", "price", "price_classes"});
    if (has(j, "kind")) {
        const std::string kind = as_str(member(j, "kind"), where + ".kind");
        if (kind == "none") r.kind = RunningSpec::Kind::None;
        else if (kind == "price") r.kind = RunningSpec::Kind::Price;
        else fail(where + ".kind", "expected 'none' or 'price', got '" + kind + "'");
    }
    if (has(j, "price")) r.price = as_table(member(j, "price"), where + ".price");
    if (has(j, "price_classes")) {
        const json& pc = member(j, "price_classes");
        if (!pc.is_array()) fail(where + ".price_classes", "expected an array of tables");
        r.price_classes.clear();
        for (std::size_t i = 0; i < pc.size(); ++i)
            r.price_classes.push_back(
                as_table(pc[i], where + ".price_classes[" + std::to_string(i) + "]"));
    }
}

void parse_costs(const json& j, const std::string& where, ScenarioConfig& cfg) {
    check_keys(j, where, {"coupling", "running", "terminal_g"});
    if (has(j, "coupling")) parse_coupling(member(j, "coupling"), where + ".coupling", cfg.coupling);
    if (has(j, "running")) parse_running(member(j, "running"), where + ".running", cfg.running);
    if (has(j, "terminal_g")) {
        const json& g = member(j, "terminal_g");
        if (!g.is_array() || g.empty()) fail(where + ".terminal_g", "expected a per-mode array");
        cfg.terminal.g.clear();
        for (std::size_t i = 0; i < g.size(); ++i)
            cfg.terminal.g.push_back(as_num(g[i], where + ".terminal_g"));
    }
}

void parse_algo(const json& j, const std::string& where, AlgoParams& a) {
    check_keys(j, where, {"trajectories", "iterations", "step_a", "seed", "lambda_guard",
                          "phi_guard", "density_refine"});
    if (has(j, "trajectories"))
        a.trajectories = as_int(member(j, "trajectories"), where + ".trajectories");
    if (has(j, "iterations"))
        a.iterations = as_int(member(j, "iterations"), where + ".iterations");
    if (has(j, "step_a")) a.step_a = as_num(member(j, "step_a"), where + ".step_a");
    if (has(j, "seed")) a.seed = as_seed(member(j, "seed"), where + ".seed");
    if (has(j, "lambda_guard"))
        a.lambda_guard = as_num(member(j, "lambda_guard"), where + ".lambda_guard");
    if (has(j, "phi_guard")) a.phi_guard = as_num(member(j, "phi_guard"), where + ".phi_guard");
    if (has(j, "density_refine"))
        a.density_refine = as_int(member(j, "density_refine"), where + ".density_refine");
}

} // namespace

ScenarioConfig default_config() {
    ScenarioConfig cfg;
    // Background draw: near-zero overnight, steady daytime usage from 8 h on.
    cfg.drift.drain = TimeTable({0.0, 8.0}, {0.003, 0.019});
    return cfg;
}

ScenarioConfig parse_config_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) fail(origin, "top level must be an object");
    check_keys(j, origin, {"grid", "physics", "bounds", "costs", "initial", "jump_cost", "algo"});

    ScenarioConfig cfg = default_config();
    if (has(j, "grid")) parse_grid(member(j, "grid"), origin + ".grid", cfg.grid);
    if (has(j, "physics")) parse_physics(member(j, "physics"), origin + ".physics", cfg.drift);
    if (has(j, "bounds")) parse_bounds(member(j, "bounds"), origin + ".bounds", cfg.safety);
    if (has(j, "costs")) parse_costs(member(j, "costs"), origin + ".costs", cfg);
    if (has(j, "initial")) {
        const json& ini = member(j, "initial");
        check_keys(ini, origin + ".initial", {"on_probability"});
        if (has(ini, "on_probability"))
            cfg.initial.on_probability =
                as_num(member(ini, "on_probability"), origin + ".initial.on_probability");
    }
    if (has(j, "jump_cost")) {
        const json& jc = member(j, "jump_cost");
        check_keys(jc, origin + ".jump_cost", {"kind"});
        if (has(jc, "kind")) {
            const std::string kind = as_str(member(jc, "kind"), origin + ".jump_cost.kind");
            if (kind != "quadratic")
                fail(origin + ".jump_cost.kind",
                     "only 'quadratic' is available in config files, got '" + kind + "'");
            cfg.jump_cost.kind = JumpCost::Kind::Quadratic;
        }
    }
    if (has(j, "algo")) parse_algo(member(j, "algo"), origin + ".algo", cfg.algo);
    return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
    return parse_config_json(read_text_file(path), path);
}

std::string canonical_config_json(const ScenarioConfig& cfg) {
    if (cfg.running.kind == RunningSpec::Kind::Custom)
        throw ConfigError("canonical_config_json: custom running costs have no file form");
    if (cfg.jump_cost.kind != JumpCost::Kind::Quadratic)
        throw ConfigError("canonical_config_json: custom jump costs have no file form");

    json j;
    j["grid"] = {{"horizon_h", cfg.grid.horizon_h},
                 {"steps", cfg.grid.n_t},
                 {"theta_lo_C", cfg.grid.theta_lo},
                 {"theta_hi_C", cfg.grid.theta_hi},
                 {"theta_cells", cfg.grid.n_theta},
                 {"modes", cfg.grid.d}};
    j["physics"] = {{"sigma_p_C_per_h", cfg.drift.sigma_p},
                    {"rho_per_h", cfg.drift.rho},
                    {"theta_amb_C", cfg.drift.theta_amb},
                    {"theta_in_C", cfg.drift.theta_in},
                    {"drain_per_h", table_json(cfg.drift.drain)}};
    j["bounds"] = {{"theta_min_C", cfg.safety.theta_min},
                   {"theta_max_C", cfg.safety.theta_max},
                   {"safety_peak_per_h", cfg.safety.peak},
                   {"ramp_width_C", cfg.safety.ramp_width}};

    json coupling;
    coupling["kind"] = cfg.coupling.kind == CouplingSpec::Kind::Tracking ? "tracking" : "none";
    coupling["kappa"] = cfg.coupling.kappa;
    if (cfg.coupling.use_nominal_mean && cfg.coupling.reference.empty())
        coupling["reference"] = "nominal-mean";
    else if (!cfg.coupling.reference.empty())
        coupling["reference"] = table_json(cfg.coupling.reference);

    json running;
    running["kind"] = cfg.running.kind == RunningSpec::Kind::Price ? "price" : "none";
    if (!cfg.running.price.empty()) running["price"] = table_json(cfg.running.price);
    if (!cfg.running.price_classes.empty()) {
        json pc = json::array();
        for (const auto& t : cfg.running.price_classes) pc.push_back(table_json(t));
        running["price_classes"] = pc;
    }
    j["costs"] = {{"coupling", coupling}, {"running", running}, {"terminal_g", cfg.terminal.g}};
    j["initial"] = {{"on_probability", cfg.initial.on_probability}};
    j["jump_cost"] = {{"kind", "quadratic"}};
    j["algo"] = {{"trajectories", cfg.algo.trajectories},
                 {"iterations", cfg.algo.iterations},
                 {"step_a", cfg.algo.step_a},
                 {"seed", cfg.algo.seed},
                 {"lambda_guard", cfg.algo.lambda_guard},
                 {"phi_guard", cfg.algo.phi_guard},
                 {"density_refine", cfg.algo.density_refine}};
    return j.dump(2) + "\n";
}

} // namespace pdmfc
