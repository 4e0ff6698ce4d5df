#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "pdmfc/config_io.hpp"
#include "pdmfc/errors.hpp"
#include "pdmfc/scenario.hpp"

namespace {

// Exit codes: 0 success, 1 unexpected, 2 config problem, 3 numerical failure,
// 4 file I/O problem. CLI parse errors use CLI11's own codes.
constexpr int kExitUnexpected = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

int run_command(const std::string& scenario, const std::string& config_path,
                const std::string& out_dir, const pdmfc::RunOverrides& ov) {
    const pdmfc::ScenarioKind kind = pdmfc::scenario_from_name(scenario);
    const pdmfc::ScenarioConfig cfg = pdmfc::load_config_file(config_path);
    const pdmfc::RunResult res = pdmfc::run_scenario(kind, cfg, out_dir, ov);
    std::printf("scenario %s finished; wrote %zu artifact(s) to %s\n",
                scenario.c_str(), res.artifacts.size(), out_dir.c_str());
    for (const auto& name : res.artifacts) std::printf("  %s\n", name.c_str());
    std::printf("summary:\n%s\n", res.summary.c_str());
    return 0;
}

int validate_command(const std::string& config_path) {
    const pdmfc::ScenarioConfig cfg = pdmfc::load_config_file(config_path);
    const auto problems = pdmfc::validate_config(cfg);
    if (problems.empty()) {
        std::printf("%s: ok\n", config_path.c_str());
        return 0;
    }
    std::fprintf(stderr, "%s: %zu problem(s)\n", config_path.c_str(), problems.size());
    for (const auto& p : problems)
        std::fprintf(stderr, "  %s: %s\n", p.field.c_str(), p.message.c_str());
    return kExitConfig;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mean-field switching control for thermostatic load fleets"};
    app.require_subcommand(1);

    std::string scenario, config_path, out_dir = "out";
    std::uint64_t seed = 0;
    int trajectories = 0, iterations = 0;
    pdmfc::RunOverrides ov;

    CLI::App* run = app.add_subcommand("run", "run a scenario and write its artifacts");
    run->add_option("scenario", scenario, "nominal | tracking | pricing | pricing3")
        ->required();
    run->add_option("--config", config_path, "JSON config file")->required();
    run->add_option("--out", out_dir, "output directory (default: out)");
    CLI::Option* seed_opt = run->add_option("--seed", seed, "override algo.seed");
    CLI::Option* traj_opt =
        run->add_option("--trajectories", trajectories, "override algo.trajectories");
    CLI::Option* iter_opt =
        run->add_option("--iterations", iterations, "override algo.iterations");
    run->add_option("--workers", ov.workers,
                    "worker threads (0 = hardware); results do not depend on this");
    run->add_flag("--emit-fields", ov.emit_fields,
                  "also write value and density fields");
    run->add_option("--dump-trajectories", ov.dump_trajectories,
                    "write this many sample paths");

    CLI::App* validate =
        app.add_subcommand("validate", "parse and check a config file");
    validate->add_option("--config", config_path, "JSON config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (run->parsed()) {
            if (seed_opt->count() > 0) ov.seed = seed;
            if (traj_opt->count() > 0) ov.trajectories = trajectories;
            if (iter_opt->count() > 0) ov.iterations = iterations;
            return run_command(scenario, config_path, out_dir, ov);
        }
        return validate_command(config_path);
    } catch (const pdmfc::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const pdmfc::NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const pdmfc::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUnexpected;
    }
}
