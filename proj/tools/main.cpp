// Command-line front end: parse a declarative run config, dispatch to the
// solvers, emit CSV/JSON artifacts plus a run manifest.

#include "tieq/run.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"time-inconsistent equilibrium control solvers"};

    tieq::RunOptions opts;
    std::string command;
    std::uint64_t seed = 0;
    bool seed_set = false;

    app.add_option("command", command,
                   "run command (must match the config when both are given)");
    app.add_option("--config", opts.config_path, "path to the run configuration")->required();
    app.add_option("--out", opts.out_dir, "output directory")->default_val(".");
    app.add_option("--seed", seed, "RNG seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--threads", opts.threads, "worker threads for path/slice parallelism")
        ->default_val(1);
    app.add_option("--solver", opts.solver, "LQ solver mode: marching | fixed-point");

    CLI11_PARSE(app, argc, argv);
    if (seed_set) opts.seed = seed;

    if (!command.empty()) {
        // a mismatch between the positional command and the config is an error
        try {
            const tieq::Config cfg = tieq::Config::parse_file(opts.config_path);
            if (!cfg.command().empty() && cfg.command() != command) {
                std::fprintf(stderr, "config error: config command '%s' does not match '%s'\n",
                             cfg.command().c_str(), command.c_str());
                return tieq::kExitConfig;
            }
        } catch (const tieq::ConfigError& e) {
            std::fprintf(stderr, "config error: %s\n", e.what());
            return tieq::kExitConfig;
        }
    }

    return tieq::run(opts);
}
