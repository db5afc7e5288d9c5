#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "harness.hpp"

int main(int argc, char** argv) {
    using namespace embounds::tools;

    CLI::App app{"bounds and optimizers for tunable scattering networks"};
    app.require_subcommand(1);

    std::string spec_path, scenario_out = "scenario.json";
    auto* gen = app.add_subcommand(
        "gen", "generate a scenario from a generator spec");
    gen->add_option("spec", spec_path, "generator spec (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    gen->add_option("-o,--output", scenario_out, "output scenario file");

    std::string config_path, sweep_out = "report";
    SweepFlags flags;
    std::optional<double> tol_feas, tol_gap;
    std::optional<std::uint64_t> seed;
    auto* sweep = app.add_subcommand(
        "sweep", "run every configured method over a scenario");
    sweep->add_option("config", config_path, "sweep config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("-o,--output", sweep_out, "output directory");
    sweep->add_option("--threads", flags.threads,
                      "worker threads (0 = all cores)");
    sweep->add_option("--tol-feas", tol_feas, "solver feasibility tolerance");
    sweep->add_option("--tol-gap", tol_gap, "solver gap tolerance");
    sweep->add_option("--seed", seed,
                      "replace the config's seed list with this one seed");

    std::string report_dir;
    auto* plot = app.add_subcommand(
        "plotdata", "condense a sweep report into plottable series");
    plot->add_option("dir", report_dir, "directory holding results.csv")
        ->required()
        ->check(CLI::ExistingDirectory);

    std::optional<std::uint64_t> gen_seed;
    gen->add_option("--seed", gen_seed, "override the spec's seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen(spec_path, scenario_out, gen_seed);
        if (sweep->parsed()) {
            flags.tol_feas = tol_feas;
            flags.tol_gap = tol_gap;
            flags.seed = seed;
            return run_sweep(config_path, sweep_out, flags);
        }
        if (plot->parsed()) return run_plotdata(report_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
