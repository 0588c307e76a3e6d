#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wavehits::data {

/// One raw meteorological record on (roughly) a 10-minute cadence. Any field
/// other than the timestamp may be missing.
struct MeteoRecord {
    std::int64_t timestamp = 0;  // epoch seconds, UTC
    std::optional<double> pressure;       // hPa
    std::optional<double> temperature;    // deg C
    std::optional<double> humidity;       // percent, [0, 100]
    std::optional<double> precipitation;  // mm
    std::optional<double> wind_speed_2min, wind_dir_2min;
    std::optional<double> wind_speed_10min, wind_dir_10min;
};

/// Column binding and timestamp format for CSV ingestion.
struct CsvSchema {
    std::string timestamp_column = "timestamp";
    std::string timestamp_format = "%Y-%m-%d %H:%M";  // %Y %m %d %H %M [%S] + literals
    std::string pressure_column = "pressure";
    std::string temperature_column = "temperature";
    std::string humidity_column = "humidity";
    std::string precipitation_column = "precipitation";
    std::string wind_speed_2min_column = "wind_speed_2min";
    std::string wind_dir_2min_column = "wind_dir_2min";
    std::string wind_speed_10min_column = "wind_speed_10min";
    std::string wind_dir_10min_column = "wind_dir_10min";
};

struct ParseReport {
    std::size_t rows_parsed = 0;
    std::map<std::string, std::size_t> invalid_cells;  // column -> count turned missing
    std::map<std::string, std::size_t> clamped_cells;  // column -> count folded in range
    std::vector<std::string> notes;

    std::size_t total_warnings() const;
    std::string summary() const;
};

struct ParseResult {
    std::vector<MeteoRecord> records;
    ParseReport report;
};

/// Reads a header-first comma-separated file into records. Unparseable or
/// out-of-range cells become missing values and are counted per column.
/// Throws on a missing file, missing mandatory columns (timestamp + 2-min
/// wind) or zero data rows.
ParseResult parse_csv(const std::string& path, const CsvSchema& schema);

/// Timestamp helpers (proleptic Gregorian, UTC).
std::int64_t civil_to_epoch(int year, int month, int day, int hour, int minute, int second);
std::string epoch_to_iso(std::int64_t epoch_seconds);
std::optional<std::int64_t> parse_timestamp(const std::string& text, const std::string& format);

constexpr std::int64_t kGridStepSeconds = 600;

enum Channel : std::size_t {
    kU2 = 0,
    kV2,
    kU10,
    kV10,
    kPressure,
    kTemperature,
    kHumidity,
    kPrecipitation,
    kNumChannels,
};

const char* channel_name(std::size_t channel);

/**
 * @brief Cleaned rows on a regular 10-minute grid.
 *
 * Rows are stored contiguously; `segments` lists the [begin, end) row ranges
 * that are temporally contiguous (600 s spacing). Gaps stitched out of the
 * grid separate segments, and no window may span a stitch.
 */
struct FrameSet {
    std::vector<std::int64_t> timestamps;
    std::vector<double> speed2, dir2, speed10, dir10;        // cleaned observables
    std::array<std::vector<double>, kNumChannels> channels;  // winds filled by derive_targets
    std::vector<std::pair<std::size_t, std::size_t>> segments;

    std::size_t rows() const { return timestamps.size(); }
    std::uint64_t fingerprint() const;
};

struct CleanReport {
    std::size_t input_records = 0;
    std::size_t duplicate_slots = 0;
    std::size_t interpolated_slots = 0;   // fully missing rows filled
    std::size_t interpolated_cells = 0;   // individual missing cells filled
    std::size_t stitched_gaps = 0;        // runs > max_gap removed
    std::size_t dropped_slots = 0;        // rows lost to stitches and edges
    std::size_t zero_filled_channels = 0; // exogenous channels with no data at all
    std::string summary() const;
};

/// Snaps records to the 10-minute grid, interpolates runs of at most 3
/// missing slots (directions through u/v space, never degrees), splits the
/// grid at longer gaps and trims unfillable edges. Throws when the target
/// (2-minute wind) channel has no usable data.
FrameSet clean_and_grid(std::span<const MeteoRecord> records, CleanReport* report = nullptr);

/// Fills the u/v channels from the cleaned speed/direction columns.
void derive_targets(FrameSet& frame);

/// Per-channel z-score statistics, fitted on training rows only. Channels
/// with zero variance are flagged and passed through unscaled.
struct Scaler {
    std::vector<double> mean, stddev;
    std::vector<bool> passthrough;

    std::size_t channels() const { return mean.size(); }
    double apply(std::size_t channel, double x) const;
    double invert(std::size_t channel, double x) const;
    static Scaler identity(std::size_t channels);
};

Scaler fit_scaler(std::span<const std::vector<double>> channels, std::size_t row_begin,
                  std::size_t row_end);

enum class Split { train = 0, validation = 1, test = 2 };

struct WindowRef {
    std::size_t start_row = 0;  // input rows [start, start+L), targets [start+L, start+L+H)
    Split split = Split::train;
};

struct WindowSet {
    std::vector<WindowRef> windows;  // chronological
    std::size_t input_length = 0, horizon = 0;
    std::size_t train_row_end = 0;  // rows [0, train_row_end) may feed the scaler
    std::array<std::size_t, 3> split_counts{};
};

/// Sliding windows with stride 1 inside contiguous segments, split
/// chronologically at the given fractions (train, validation, test).
WindowSet make_windows(const FrameSet& frame, std::size_t input_length,
                       std::size_t horizon, std::array<double, 3> fractions);

/**
 * @brief Seeded synthetic wind regime for experiments and acceptance runs.
 *
 * Direction is a slow drift plus a diurnal sinusoid plus AR(1) noise,
 * wrapped to [0, 360) with deliberate north-boundary crossings; speed is a
 * positive AR(1) process; exogenous channels are smooth correlated
 * processes. Fully deterministic per seed.
 */
struct SynthSpec {
    std::uint64_t seed = 42;
    std::size_t n_steps = 20000;
    double base_direction = 315.0;       // degrees
    double drift_per_step = 0.0045;      // degrees per 10-minute step
    double diurnal_amplitude = 45.0;     // degrees
    double diurnal_period_steps = 144.0; // 24 h at 10-minute cadence
    double noise_std = 8.0;              // stationary AR(1) std, degrees
    double noise_phi = 0.35;
    double speed_mean = 5.0;             // m/s
    double speed_std = 1.5;
    double speed_phi = 0.9;
    double speed_floor = 0.3;
    std::int64_t start_timestamp = 1604534400;  // 2020-11-05 00:00 UTC
};

FrameSet synth_wind(const SynthSpec& spec);

/// Counts 0/360 wrap events (consecutive steps jumping across north).
std::size_t count_north_crossings(std::span<const double> directions_deg);

/// Writes a FrameSet back to the canonical CSV dialect (the ingestion
/// input format). Stitched gaps appear as timestamp jumps.
void write_frame_csv(const FrameSet& frame, const CsvSchema& schema,
                     const std::string& path, const std::string& provenance_header);

}  // namespace wavehits::data
