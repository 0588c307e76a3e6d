#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavehits/data.hpp"

namespace wavehits::config {

enum class Variant { wavehits, nhits_uv, nhits_direct, persistence };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

/**
 * @brief One experiment, fully specified: data source, wavelet settings,
 * architecture, optimizer and evaluation knobs.
 *
 * Serialized as sectioned plain text ([data], [wavelet], [model], [train],
 * [eval], [selfcheck]); every field maps to exactly one dotted key, which is
 * also the --set override syntax.
 */
struct ExperimentConfig {
    // [data]
    std::string source = "synth";  // "csv" | "synth"
    std::string csv_path;
    data::CsvSchema schema;
    data::SynthSpec synth;

    // [wavelet]
    std::string wavelet_name = "db4";
    int wavelet_levels = 3;
    std::string wavelet_boundary = "symmetric";
    int denoise_keep = 3;  // kept detail levels; == levels means no denoising

    // [model]
    Variant variant = Variant::wavehits;
    std::size_t input_length = 64;
    std::size_t horizon = 6;
    std::vector<int> pool_kernels{4, 2, 1};
    std::vector<std::size_t> hidden_widths{64, 64};
    std::vector<std::size_t> forecast_knots{2, 3, 6};
    std::vector<std::size_t> backcast_knots{8, 16, 32};

    // [train]
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t batch_size = 128;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
    std::uint64_t seed = 42;
    double train_fraction = 0.70;
    double val_fraction = 0.15;
    double test_fraction = 0.15;

    // [eval]
    double hr_delta = 15.0;

    // [selfcheck]
    double selfcheck_roundtrip_tol = 1e-9;
    double selfcheck_wavelet_tol = 1e-10;
    double selfcheck_metric_tol = 1e-12;
    double selfcheck_grad_tol = 1e-4;
};

/// Every recognized dotted key, in canonical emission order.
std::vector<std::string> config_keys();

/// Reads one dotted key back as a string.
std::string get_value(const ExperimentConfig& cfg, const std::string& key);

/// Sets one dotted key from a string; throws naming the key when it is
/// unknown or the value does not parse.
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Applies "key=value" pairs in order.
void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& pairs);

/// Parses sectioned plain text (comments with '#', sections as [name],
/// entries as key = value).
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Deterministic full serialization; parse_config_text(canonical_text(c))
/// reproduces c.
std::string canonical_text(const ExperimentConfig& cfg);

std::uint64_t digest(const ExperimentConfig& cfg);

/// Cross-field sanity checks; throws std::invalid_argument on violations.
void validate(const ExperimentConfig& cfg);

}  // namespace wavehits::config
