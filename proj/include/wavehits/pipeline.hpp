#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wavehits/config.hpp"
#include "wavehits/data.hpp"
#include "wavehits/nhits.hpp"

namespace wavehits::pipeline {

/// The per-variant base input channels, unscaled, one row per channel over
/// the whole frame.
struct ChannelSet {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> names;
    std::vector<std::size_t> target_rows;
};

ChannelSet build_channels(config::Variant variant, const data::FrameSet& frame);

/// A materialized training/evaluation window: scaled input channel matrix
/// (wavelet feature rows appended for the wavehits variant) and the scaled
/// target matrix.
struct ModelWindow {
    nn::Tensor2 input;   // [model_channels x L]
    nn::Tensor2 target;  // [targets x H]
    std::size_t start_row = 0;
    data::Split split = data::Split::train;
};

struct PreparedData {
    data::FrameSet frame;
    data::WindowSet plan;
    data::Scaler scaler;  // over the base channels
    std::vector<ModelWindow> windows;
    std::size_t base_channels = 0;
    std::size_t model_channels = 0;
    std::vector<std::size_t> target_rows;
    std::uint64_t data_fingerprint = 0;
};

/// Builds channels, window plan, scaler (training rows only) and the
/// materialized window matrices for the configured variant.
PreparedData prepare(const config::ExperimentConfig& cfg, data::FrameSet frame);

/// Loads the frame named by the config (csv path or synthetic spec).
data::FrameSet load_frame(const config::ExperimentConfig& cfg);

struct TrainHistory {
    std::vector<double> train_loss, val_loss;
    std::size_t best_epoch = 0;
};

struct TrainedArtifact {
    config::ExperimentConfig config;
    nhits::NhitsModel model;  // no blocks for the persistence variant
    data::Scaler scaler;
    TrainHistory history;
    std::uint64_t data_fingerprint = 0;

    bool has_model() const { return !model.blocks.empty(); }
};

using LogFn = std::function<void(const std::string&)>;

/// Mini-batch Adam on MSE over normalized targets with early stopping on
/// validation loss; restores the best-epoch parameters. The persistence
/// variant needs no fitting and returns immediately.
TrainedArtifact train(const config::ExperimentConfig& cfg, const PreparedData& prepared,
                      const LogFn& log = {});

/// H-step direction/speed forecast for one window. Direction is always in
/// [0, 360); calm marks steps whose predicted wind vector is exactly zero.
/// The direct (degrees-target) variant predicts no magnitude and reports
/// unit speed.
struct DirectionForecast {
    std::vector<double> direction;
    std::vector<double> speed;
    std::vector<bool> calm;
};

DirectionForecast forecast_window(const TrainedArtifact& artifact,
                                  const PreparedData& prepared, std::size_t window_index);

/// Repeats the last observed wind vector of the input span H times.
DirectionForecast persistence_forecast(const data::FrameSet& frame, std::size_t start_row,
                                       std::size_t input_length, std::size_t horizon);

/// Per-step metric table in the layout of the evaluation protocol: one row
/// per metric, one column per forecast step. True calm samples are excluded
/// from direction metrics and counted.
struct ForecastReport {
    std::size_t horizon = 0;
    double hr_delta = 15.0;
    std::vector<std::string> metric_names;
    std::map<std::string, std::vector<double>> values;
    std::vector<std::size_t> samples_per_step;
    std::vector<std::size_t> calm_excluded_per_step;

    const std::vector<double>& at(const std::string& name) const { return values.at(name); }
};

using Forecaster = std::function<DirectionForecast(std::size_t window_index)>;

ForecastReport evaluate(const TrainedArtifact& artifact, const PreparedData& prepared,
                        data::Split split);

/// Evaluation against an arbitrary forecaster (test stubs, baselines).
ForecastReport evaluate_with(const Forecaster& forecaster, const PreparedData& prepared,
                             data::Split split, double hr_delta);

// ---------------------------------------------------------------------------
// Model container (binary, versioned, checksummed)
// ---------------------------------------------------------------------------

void save_artifact(const TrainedArtifact& artifact, const std::string& path);
TrainedArtifact load_artifact(const std::string& path);

/// Channel/target layout implied by a config; shared by prepare() and the
/// container loader.
nhits::ModelSpec model_spec_from(const config::ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Report emission (report.cpp)
// ---------------------------------------------------------------------------

/// Deterministic provenance header: tool version, config digest, seed and
/// the data fingerprint/time span. Lines start with '#'.
std::string provenance_header(const config::ExperimentConfig& cfg,
                              const data::FrameSet& frame);

std::string report_csv(const ForecastReport& report, const std::string& header);
std::string report_table(const ForecastReport& report, const std::string& title);
std::string history_csv(const TrainHistory& history, const std::string& header);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace wavehits::pipeline
