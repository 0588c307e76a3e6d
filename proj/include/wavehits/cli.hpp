#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wavehits/config.hpp"

namespace wavehits::cli {

/// One parsed invocation: a subcommand's inputs minus the subcommand itself.
struct Options {
    std::string config_path;              // empty uses built-in defaults
    std::vector<std::string> overrides;   // repeatable --set key=value
    std::optional<std::uint64_t> seed;    // --seed N, alias for train.seed
    std::string out_dir = ".";
    int verbosity = 1;                    // 0 --quiet, 2 --verbose
};

/// Loads the config, applies overrides (before validation) and the seed
/// alias, then validates. Unknown keys fail fast naming the key.
config::ExperimentConfig resolve_config(const Options& opts);

int run_ingest(const Options& opts);
int run_synth(const Options& opts);
int run_train(const Options& opts);
int run_evaluate(const Options& opts);
int run_forecast(const Options& opts);
int run_ablate(const Options& opts);
int run_selfcheck(const Options& opts);

}  // namespace wavehits::cli
