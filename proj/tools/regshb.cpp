#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "regshb/cli_config.hpp"
#include "regshb/errors.hpp"

namespace {

struct CommonArgs {
    std::string preset;
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir = ".";

    regshb::ExperimentSpec parse() const {
        std::optional<std::string> p;
        if (!preset.empty()) p = preset;
        std::optional<std::filesystem::path> c;
        if (!config_path.empty()) c = config_path;
        return regshb::parse_config(p, c, overrides);
    }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_out) {
    cmd->add_option("preset", args.preset, "built-in profile: fredholm|tomo|schlieren");
    cmd->add_option("--config", args.config_path, "config file (JSON)");
    cmd->add_option("--set", args.overrides, "override KEY=VALUE (repeatable)");
    cmd->add_option("--seed", args.seed, "base seed")->each([&](const std::string&) {
        args.seed_set = true;
    });
    if (with_out) cmd->add_option("--out", args.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive stochastic heavy ball solver for ill-posed operator systems"};
    app.require_subcommand(1);

    CommonArgs solve_args, bench_args, export_args;
    std::string solver_name;
    double noise_level = -1.0;
    bool noise_set = false;
    std::size_t workers = 0;
    std::size_t trials = 0;
    std::uint64_t check_seed = 12345;

    CLI::App* solve = app.add_subcommand("solve", "run one problem / one solver / one seed");
    add_common(solve, solve_args, true);
    solve->add_option("--solver", solver_name, "solver name from the config");
    solve->add_option("--noise", noise_level, "single noise level")->each([&](const std::string&) {
        noise_set = true;
    });

    CLI::App* bench = app.add_subcommand("bench", "full Monte-Carlo sweep");
    add_common(bench, bench_args, true);
    bench->add_option("--workers", workers, "worker threads (env REG_SHB_WORKERS, then cores)");
    bench->add_option("--trials", trials, "override trial count");

    CLI::App* check = app.add_subcommand("check", "run the module invariant suites");
    check->add_option("--seed", check_seed, "seed for the randomized checks");

    CLI::App* exportp = app.add_subcommand("export-problem", "write phantom/system binaries");
    add_common(exportp, export_args, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            auto spec = solve_args.parse();
            regshb::SolveOptions opts;
            opts.solver_name = solver_name;
            if (noise_set) opts.noise_level = noise_level;
            opts.seed = solve_args.seed_set ? solve_args.seed : spec.base_seed;
            opts.out_dir = solve_args.out_dir;
            return regshb::cmd_solve(spec, opts);
        }
        if (bench->parsed()) {
            auto spec = bench_args.parse();
            if (trials > 0) spec.trials = trials;
            regshb::BenchOptions opts;
            opts.seed = bench_args.seed;
            opts.seed_set = bench_args.seed_set;
            opts.workers = workers;
            opts.out_dir = bench_args.out_dir;
            return regshb::cmd_bench(spec, opts);
        }
        if (check->parsed()) return regshb::cmd_check(check_seed);
        if (exportp->parsed()) {
            auto spec = export_args.parse();
            return regshb::cmd_export_problem(spec, export_args.out_dir);
        }
    } catch (const regshb::ConfigError& e) {
        std::cerr << "{\"error\": {\"type\": \"config\", \"message\": \"" << e.what()
                  << "\"}}\n";
        return 2;
    } catch (const regshb::InputError& e) {
        std::cerr << "{\"error\": {\"type\": \"input\", \"message\": \"" << e.what() << "\"}}\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\": {\"type\": \"internal\", \"message\": \"" << e.what()
                  << "\"}}\n";
        return 3;
    }
    return 0;
}
