// benney_lab: command-line front end.
//
//   benney_lab simulate --config run.cfg --out results/
//   benney_lab verify --seed 7
//   benney_lab verify --replay results/failures/sample_7_3.json
//   benney_lab sweep --config sweep.cfg --jobs 4
//   benney_lab galerkin-compare --config galerkin.cfg
//   benney_lab keys

#include "benney/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification lab for the generalized Benney-Lin equation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(benney::artifact_version));

    benney::CommandOptions opts;
    std::string out, replay;
    std::uint64_t seed = 0;
    int jobs = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "configuration file (key = value)")->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides output.dir)");
        sub->add_option("--seed", seed, "seed for randomized oracles (overrides run.seed)");
        sub->add_option("--jobs", jobs, "parallel workers for sweeps (default: all cores)")->check(CLI::PositiveNumber);
    };
    auto* simulate = app.add_subcommand("simulate", "run one configuration, write energy.csv and manifest.json");
    auto* verify = app.add_subcommand("verify", "randomized inequality oracles");
    auto* sweep = app.add_subcommand("sweep", "grid of (L, k, amplitude) runs");
    auto* galerkin = app.add_subcommand("galerkin-compare", "Galerkin truncations against the finite-difference run");
    auto* keys = app.add_subcommand("keys", "list configuration keys with defaults");
    for (auto* s : {simulate, verify, sweep, galerkin}) common(s);
    verify->add_option("--replay", replay, "re-evaluate a serialized sample")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : benney::exit_config_error;
    }

    for (auto* s : {simulate, verify, sweep, galerkin}) {
        if (s->count("--out")) opts.out = out;
        if (s->count("--seed")) opts.seed = seed;
        if (s->count("--jobs")) opts.jobs = jobs;
    }
    if (!replay.empty()) opts.replay = replay;

    if (*keys) {
        const benney::RunConfig defaults;
        for (const auto& f : benney::config_fields())
            std::cout << f.key << " = " << f.get(defaults) << "    # " << f.doc << "\n";
        return 0;
    }
    if (*simulate) return benney::cmd_simulate(opts);
    if (*verify) return benney::cmd_verify(opts);
    if (*sweep) return benney::cmd_sweep(opts);
    return benney::cmd_galerkin_compare(opts);
}
