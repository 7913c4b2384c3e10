// Command line front end: enumerate | amplitude | scatter | montecarlo | evolve.
// Exit codes: 0 ok, 2 configuration problem, 3 physics domain error,
// 4 statistical self-test failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qfsim/scenario.hpp"

namespace {

int write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::fputs(text.c_str(), stdout);
        return 0;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw qfsim::ConfigError("cannot open output file: " + out_path);
    f << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"process-based interaction model for lepton scattering"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, format = "text";
    std::uint64_t seed = 0, trials = 0;
    int graining = 0;
    int workers = 0;
    bool selftest = false;

    app.add_option("--scenario", scenario_path, "scenario file")->required();
    auto* opt_seed = app.add_option("--seed", seed, "override scenario seed");
    auto* opt_trials = app.add_option("--trials", trials, "override trial count");
    auto* opt_grain = app.add_option("--graining", graining, "override angular graining");
    auto* opt_workers = app.add_option("--workers", workers, "override worker threads");
    app.add_option("--out", out_path, "write output to this file instead of stdout");
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "records"}));
    app.add_flag("--selftest", selftest,
                 "exit 4 when the run's statistical checks fail");

    auto* cmd_enumerate =
        app.add_subcommand("enumerate", "list channel shapes and channels");
    auto* cmd_amplitude =
        app.add_subcommand("amplitude", "print the helicity amplitude table");
    auto* cmd_scatter = app.add_subcommand("scatter", "run one seeded interaction");
    auto* cmd_montecarlo =
        app.add_subcommand("montecarlo", "repeat seeded interaction trials");
    auto* cmd_evolve = app.add_subcommand("evolve", "step the lattice system");
    for (auto* c : {cmd_enumerate, cmd_amplitude, cmd_scatter, cmd_montecarlo,
                    cmd_evolve})
        c->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        qfsim::Scenario sc = qfsim::load_scenario(scenario_path);
        if (opt_seed->count()) sc.cfg.seed = seed;
        if (opt_trials->count()) sc.trials = trials;
        if (opt_grain->count()) sc.cfg.graining = graining;
        if (opt_workers->count()) sc.cfg.workers = workers;
        sc.cfg.validate();

        const bool records = format == "records";
        int rc = 0;
        std::string output;
        if (cmd_enumerate->parsed()) {
            output = qfsim::run_enumerate(sc);
        } else if (cmd_amplitude->parsed()) {
            output = qfsim::run_amplitude(sc);
        } else if (cmd_scatter->parsed()) {
            output = qfsim::run_scatter(sc);
        } else if (cmd_montecarlo->parsed()) {
            qfsim::RunReport rep = qfsim::run_montecarlo(sc);
            output = records ? rep.to_records() : rep.to_text();
            if (selftest && (rep.pvalue <= 0.001 || rep.conservation_failures > 0 ||
                             rep.anticorrelation_violations > 0))
                rc = 4;
        } else if (cmd_evolve->parsed()) {
            qfsim::EvolveResult r = qfsim::run_evolve(sc);
            output = records ? r.to_records() : r.to_text();
        }
        write_output(out_path, output);
        return rc;
    } catch (const qfsim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const qfsim::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
