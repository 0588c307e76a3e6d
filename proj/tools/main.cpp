#include <CLI11.hpp>

#include "wavehits/cli.hpp"
#include "wavehits/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"wavehits: multi-step wind-direction nowcasting"};
    app.set_version_flag("--version", wavehits::kVersion);
    app.require_subcommand(1);

    wavehits::cli::Options opts;
    bool quiet = false, verbose = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", opts.config_path, "config file (sectioned key = value)")
            ->check(CLI::ExistingFile);
        cmd->add_option("-s,--set", opts.overrides,
                        "override a config key, e.g. --set model.variant=nhits_uv")
            ->take_all();
        cmd->add_option("--seed", opts.seed, "alias for --set train.seed=N");
        cmd->add_option("-o,--out", opts.out_dir, "output directory (default: .)");
        cmd->add_flag("-q,--quiet", quiet, "suppress progress output");
        cmd->add_flag("-v,--verbose", verbose, "per-epoch progress");
    };

    auto* ingest = app.add_subcommand("ingest", "clean a CSV onto the 10-minute grid");
    auto* synth = app.add_subcommand("synth", "generate a seeded synthetic wind series");
    auto* train = app.add_subcommand("train", "fit the configured variant");
    auto* evaluate = app.add_subcommand("evaluate", "per-step metric report on the test split");
    auto* forecast = app.add_subcommand("forecast", "per-window direction/speed forecasts");
    auto* ablate = app.add_subcommand("ablate",
                                      "train and compare all variants with a shared seed");
    auto* selfcheck = app.add_subcommand("selfcheck", "run the built-in verification suites");
    for (auto* cmd : {ingest, synth, train, evaluate, forecast, ablate, selfcheck})
        add_common(cmd);

    CLI11_PARSE(app, argc, argv);
    opts.verbosity = quiet ? 0 : (verbose ? 2 : 1);

    if (ingest->parsed()) return wavehits::cli::run_ingest(opts);
    if (synth->parsed()) return wavehits::cli::run_synth(opts);
    if (train->parsed()) return wavehits::cli::run_train(opts);
    if (evaluate->parsed()) return wavehits::cli::run_evaluate(opts);
    if (forecast->parsed()) return wavehits::cli::run_forecast(opts);
    if (ablate->parsed()) return wavehits::cli::run_ablate(opts);
    if (selfcheck->parsed()) return wavehits::cli::run_selfcheck(opts);
    return 1;
}
