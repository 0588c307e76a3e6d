#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "wavehits/circular.hpp"
#include "wavehits/data.hpp"
#include "wavehits/util.hpp"

#include <ctime>

using namespace wavehits;
using namespace wavehits::data;
using Catch::Approx;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
    const auto dir = fs::temp_directory_path() / "wavehits_data_tests";
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
    const auto path = scratch_dir() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

MeteoRecord full_record(std::int64_t t, double speed, double dir, double pressure = 1000.0) {
    MeteoRecord r;
    r.timestamp = t;
    r.pressure = pressure;
    r.temperature = 10.0;
    r.humidity = 50.0;
    r.precipitation = 0.0;
    r.wind_speed_2min = speed;
    r.wind_dir_2min = dir;
    r.wind_speed_10min = speed;
    r.wind_dir_10min = dir;
    return r;
}

std::vector<MeteoRecord> regular_records(std::size_t n, std::int64_t t0 = 0) {
    std::vector<MeteoRecord> recs;
    for (std::size_t i = 0; i < n; ++i)
        recs.push_back(full_record(t0 + static_cast<std::int64_t>(i) * 600, 3.0 + 0.1 * (i % 7),
                                   circular::wrap_degrees(10.0 * static_cast<double>(i))));
    return recs;
}

bool frames_equal(const FrameSet& a, const FrameSet& b) {
    if (a.timestamps != b.timestamps || a.segments != b.segments) return false;
    if (a.speed2 != b.speed2 || a.dir2 != b.dir2) return false;
    if (a.speed10 != b.speed10 || a.dir10 != b.dir10) return false;
    for (std::size_t c = 0; c < kNumChannels; ++c)
        if (a.channels[c] != b.channels[c]) return false;
    return true;
}

// Rebuilds records from a cleaned frame, as a re-ingestion would see them.
std::vector<MeteoRecord> records_from_frame(const FrameSet& frame) {
    std::vector<MeteoRecord> recs;
    for (std::size_t i = 0; i < frame.rows(); ++i) {
        MeteoRecord r;
        r.timestamp = frame.timestamps[i];
        r.pressure = frame.channels[kPressure][i];
        r.temperature = frame.channels[kTemperature][i];
        r.humidity = frame.channels[kHumidity][i];
        r.precipitation = frame.channels[kPrecipitation][i];
        r.wind_speed_2min = frame.speed2[i];
        r.wind_dir_2min = frame.dir2[i];
        r.wind_speed_10min = frame.speed10[i];
        r.wind_dir_10min = frame.dir10[i];
        recs.push_back(r);
    }
    return recs;
}

}  // namespace

TEST_CASE("timestamp parsing matches an independent calendar oracle", "[data]") {
    const auto parsed = parse_timestamp("2020-11-05 00:10", "%Y-%m-%d %H:%M");
    REQUIRE(parsed.has_value());

    std::tm tm{};
    tm.tm_year = 2020 - 1900;
    tm.tm_mon = 10;  // November
    tm.tm_mday = 5;
    tm.tm_hour = 0;
    tm.tm_min = 10;
    const std::int64_t oracle = static_cast<std::int64_t>(timegm(&tm));
    CHECK(*parsed == oracle);

    CHECK(parse_timestamp("1970-01-01 00:00:00", "%Y-%m-%d %H:%M:%S") == 0);
    CHECK(epoch_to_iso(*parsed) == "2020-11-05T00:10:00Z");
    CHECK_FALSE(parse_timestamp("2020-13-05 00:10", "%Y-%m-%d %H:%M").has_value());
    CHECK_FALSE(parse_timestamp("garbage", "%Y-%m-%d %H:%M").has_value());
}

TEST_CASE("parse_csv reads well-formed rows", "[data]") {
    const auto path = write_file("ok.csv",
        "timestamp,pressure,temperature,humidity,precipitation,"
        "wind_speed_2min,wind_dir_2min,wind_speed_10min,wind_dir_10min\n"
        "2020-11-05 00:00,1001.5,4.2,63,0,3.1,350,3.0,348\n"
        "2020-11-05 00:10,1001.3,4.1,64,0,3.4,355,3.2,351\n"
        "2020-11-05 00:20,1001.1,4.0,66,0.2,3.6,2,3.3,359\n");
    const auto result = parse_csv(path.string(), CsvSchema{});
    REQUIRE(result.records.size() == 3);
    CHECK(result.report.total_warnings() == 0);
    CHECK(result.records[1].wind_dir_2min == Approx(355.0));
    CHECK(result.records[2].precipitation == Approx(0.2));
    CHECK(result.records[1].timestamp - result.records[0].timestamp == 600);
}

TEST_CASE("parse_csv flags out-of-range cells as missing", "[data]") {
    const auto path = write_file("bad_dir.csv",
        "timestamp,wind_speed_2min,wind_dir_2min\n"
        "2020-11-05 00:00,3.1,361\n"
        "2020-11-05 00:10,3.2,10\n");
    const auto result = parse_csv(path.string(), CsvSchema{});
    REQUIRE(result.records.size() == 2);
    CHECK_FALSE(result.records[0].wind_dir_2min.has_value());
    CHECK(result.report.invalid_cells.at("wind_dir_2min") == 1);
    CHECK(result.report.total_warnings() == 1);
}

TEST_CASE("parse_csv folds direction 360 onto 0 and counts the clamp", "[data]") {
    const auto path = write_file("clamp.csv",
        "timestamp,wind_speed_2min,wind_dir_2min\n"
        "2020-11-05 00:00,3.1,360\n");
    const auto result = parse_csv(path.string(), CsvSchema{});
    CHECK(result.records[0].wind_dir_2min == Approx(0.0));
    CHECK(result.report.clamped_cells.at("wind_dir_2min") == 1);
}

TEST_CASE("parse_csv error paths", "[data]") {
    CHECK_THROWS_AS(parse_csv("/nonexistent/file.csv", CsvSchema{}), std::runtime_error);

    const auto no_col = write_file("no_col.csv", "timestamp,foo\n2020-11-05 00:00,1\n");
    CHECK_THROWS_AS(parse_csv(no_col.string(), CsvSchema{}), std::runtime_error);

    const auto empty = write_file("empty.csv", "timestamp,wind_speed_2min,wind_dir_2min\n");
    CHECK_THROWS_AS(parse_csv(empty.string(), CsvSchema{}), std::runtime_error);
}

TEST_CASE("clean_and_grid passes a complete series through unchanged", "[data]") {
    const auto recs = regular_records(50);
    CleanReport report;
    const auto frame = clean_and_grid(recs, &report);
    REQUIRE(frame.rows() == 50);
    REQUIRE(frame.segments.size() == 1);
    CHECK(report.interpolated_cells == 0);
    CHECK(report.stitched_gaps == 0);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(frame.speed2[i] == Approx(*recs[i].wind_speed_2min));
        CHECK(frame.dir2[i] == Approx(*recs[i].wind_dir_2min));
        CHECK(frame.timestamps[i] == recs[i].timestamp);
    }
}

TEST_CASE("clean_and_grid interpolates a single missing scalar linearly", "[data]") {
    auto recs = regular_records(20);
    recs[10].pressure = 1000.0;
    recs[11].pressure.reset();
    recs[12].pressure = 1002.0;
    const auto frame = clean_and_grid(recs);
    CHECK(frame.channels[kPressure][11] == Approx(1001.0));
}

TEST_CASE("directions interpolate through u/v space, never degrees", "[data]") {
    auto recs = regular_records(9);
    for (auto& r : recs) {
        r.wind_speed_2min = 2.0;
        r.wind_speed_10min = 2.0;
        r.wind_dir_2min = 350.0;
        r.wind_dir_10min = 350.0;
    }
    recs[4].wind_dir_2min.reset();  // missing between 350 and 10 at equal speeds
    recs[4].wind_speed_2min.reset();
    for (std::size_t i = 5; i < 9; ++i) {
        recs[i].wind_dir_2min = 10.0;
        recs[i].wind_dir_10min = 10.0;
    }
    const auto frame = clean_and_grid(recs);
    REQUIRE(frame.rows() == 9);
    CHECK(circular::angular_diff(frame.dir2[4], 0.0) < 1e-9);  // not 180
    CHECK(frame.speed2[4] < 2.0);      // chord is shorter than the arc
    CHECK(frame.speed2[4] > 1.9);
}

TEST_CASE("runs longer than three missing slots become stitches", "[data]") {
    auto recs = regular_records(40);
    // remove slots 10..14 entirely (5 consecutive)
    recs.erase(recs.begin() + 10, recs.begin() + 15);
    CleanReport report;
    const auto frame = clean_and_grid(recs, &report);
    CHECK(report.stitched_gaps == 1);
    REQUIRE(frame.segments.size() == 2);
    CHECK(frame.segments[0].second - frame.segments[0].first == 10);
    CHECK(frame.segments[1].second - frame.segments[1].first == 25);
    // spacing is constant inside segments, jumps across the stitch
    CHECK(frame.timestamps[10] - frame.timestamps[9] == 6 * 600);
}

TEST_CASE("short gaps are filled instead of stitched", "[data]") {
    auto recs = regular_records(30);
    recs.erase(recs.begin() + 5, recs.begin() + 8);  // 3 consecutive missing
    CleanReport report;
    const auto frame = clean_and_grid(recs, &report);
    CHECK(report.stitched_gaps == 0);
    CHECK(report.interpolated_slots == 3);
    REQUIRE(frame.segments.size() == 1);
    REQUIRE(frame.rows() == 30);
    for (std::size_t i = 1; i < frame.rows(); ++i)
        CHECK(frame.timestamps[i] - frame.timestamps[i - 1] == 600);
}

TEST_CASE("clean_and_grid requires usable target data", "[data]") {
    std::vector<MeteoRecord> recs(5);
    for (std::size_t i = 0; i < 5; ++i) {
        recs[i].timestamp = static_cast<std::int64_t>(i) * 600;
        recs[i].pressure = 1000.0;
    }
    CHECK_THROWS_AS(clean_and_grid(recs), std::runtime_error);
    CHECK_THROWS_AS(clean_and_grid(std::vector<MeteoRecord>{}), std::invalid_argument);
}

TEST_CASE("clean_and_grid is idempotent", "[data]") {
    auto recs = regular_records(60);
    recs.erase(recs.begin() + 20, recs.begin() + 26);  // stitch
    recs.erase(recs.begin() + 9, recs.begin() + 11);   // interpolated gap
    recs[40].pressure.reset();
    const auto once = clean_and_grid(recs);
    const auto twice = clean_and_grid(records_from_frame(once));
    CHECK(frames_equal(once, twice));
}

TEST_CASE("derive_targets fills u/v and preserves speed", "[data]") {
    auto recs = regular_records(10);
    recs[0].wind_speed_2min = 1.0;
    recs[0].wind_dir_2min = 0.0;
    recs[1].wind_speed_2min = 0.0;  // calm
    recs[1].wind_dir_2min = 0.0;
    const auto frame = clean_and_grid(recs);
    CHECK(frame.channels[kU2][0] == Approx(0.0).margin(1e-12));
    CHECK(frame.channels[kV2][0] == Approx(-1.0));
    CHECK(frame.channels[kU2][1] == 0.0);
    CHECK(frame.channels[kV2][1] == 0.0);
    for (std::size_t i = 0; i < frame.rows(); ++i) {
        CHECK(std::hypot(frame.channels[kU2][i], frame.channels[kV2][i]) ==
              Approx(frame.speed2[i]).margin(1e-9));
        const auto back =
            circular::from_uv({frame.channels[kU2][i], frame.channels[kV2][i]});
        if (!back.calm) CHECK(circular::angular_diff(back.direction, frame.dir2[i]) < 1e-9);
    }
}

TEST_CASE("fit_scaler z-scores with the population deviation", "[data]") {
    std::vector<std::vector<double>> channels{{0.0, 2.0}, {5.0, 5.0}};
    const auto scaler = fit_scaler(channels, 0, 2);
    CHECK(scaler.mean[0] == Approx(1.0));
    CHECK(scaler.stddev[0] == Approx(1.0));
    CHECK(scaler.apply(0, 0.0) == Approx(-1.0));
    CHECK(scaler.apply(0, 2.0) == Approx(1.0));

    CHECK(scaler.passthrough[1]);  // constant channel flagged and unscaled
    CHECK(scaler.apply(1, 5.0) == 5.0);

    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        const double x = util::uniform_range(rng, -100, 100);
        CHECK(scaler.invert(0, scaler.apply(0, x)) == Approx(x).margin(1e-12));
    }
    CHECK_THROWS_AS(fit_scaler(channels, 2, 2), std::invalid_argument);
}

TEST_CASE("make_windows counts and chronology", "[data]") {
    const auto frame = clean_and_grid(regular_records(100));
    const auto set = make_windows(frame, 64, 6, {0.7, 0.15, 0.15});
    CHECK(set.windows.size() == 31);  // 100 - 64 - 6 + 1

    // chronological split: train < validation < test in start time
    std::int64_t last_train = -1, last_val = -1;
    for (const auto& w : set.windows) {
        const auto t = frame.timestamps[w.start_row];
        if (w.split == Split::train) last_train = std::max(last_train, t);
        if (w.split == Split::validation) last_val = std::max(last_val, t);
    }
    for (const auto& w : set.windows) {
        const auto t = frame.timestamps[w.start_row];
        if (w.split == Split::validation) CHECK(t > last_train);
        if (w.split == Split::test) {
            CHECK(t > last_train);
            CHECK(t > last_val);
        }
    }
    CHECK(set.split_counts[0] + set.split_counts[1] + set.split_counts[2] ==
          set.windows.size());
}

TEST_CASE("windows never span a gap stitch", "[data]") {
    std::mt19937_64 rng(3141);
    for (int trial = 0; trial < 20; ++trial) {
        auto recs = regular_records(300);
        // punch a few random long gaps
        for (int g = 0; g < 3; ++g) {
            const std::size_t at = 30 + rng() % 200;
            const std::size_t len = 4 + rng() % 4;
            for (std::size_t i = at; i < std::min(at + len, recs.size()); ++i)
                recs[i].wind_speed_2min.reset();
        }
        const auto frame = clean_and_grid(recs);
        const auto set = make_windows(frame, 16, 4, {0.7, 0.15, 0.15});
        for (const auto& w : set.windows) {
            bool inside = false;
            for (const auto& [begin, end] : frame.segments)
                inside |= (w.start_row >= begin && w.start_row + 20 <= end);
            CHECK(inside);
        }
    }
}

TEST_CASE("make_windows error paths", "[data]") {
    const auto frame = clean_and_grid(regular_records(30));
    CHECK_THROWS_AS(make_windows(frame, 64, 6, {0.7, 0.15, 0.15}), std::invalid_argument);
    CHECK_THROWS_AS(make_windows(frame, 16, 4, {0.7, 0.7, 0.15}), std::invalid_argument);
}

TEST_CASE("scaler statistics depend only on training rows", "[data]") {
    const auto frame = clean_and_grid(regular_records(200));
    const auto set = make_windows(frame, 32, 4, {0.7, 0.15, 0.15});
    REQUIRE(set.train_row_end > 0);
    REQUIRE(set.train_row_end < frame.rows());

    std::vector<std::vector<double>> channels(frame.channels.begin(), frame.channels.end());
    const auto base = fit_scaler(channels, 0, set.train_row_end);

    auto perturbed = channels;
    perturbed[kPressure].back() += 1234.5;  // a row no training window can reach
    const auto refit = fit_scaler(perturbed, 0, set.train_row_end);
    for (std::size_t c = 0; c < base.mean.size(); ++c) {
        CHECK(base.mean[c] == refit.mean[c]);      // bit-identical
        CHECK(base.stddev[c] == refit.stddev[c]);
    }
}

TEST_CASE("synth_wind is deterministic per seed", "[data]") {
    SynthSpec spec;
    spec.n_steps = 500;
    const auto a = synth_wind(spec);
    const auto b = synth_wind(spec);
    CHECK(frames_equal(a, b));

    spec.seed = 43;
    const auto c = synth_wind(spec);
    CHECK_FALSE(frames_equal(a, c));
}

TEST_CASE("synth_wind crosses the north boundary often enough", "[data]") {
    SynthSpec spec;
    spec.n_steps = 10000;
    const auto frame = synth_wind(spec);
    CHECK(count_north_crossings(frame.dir2) >= 20);
}

TEST_CASE("zero-noise synth_wind is exactly drift plus sinusoid", "[data]") {
    SynthSpec spec;
    spec.n_steps = 300;
    spec.noise_std = 0.0;
    spec.speed_std = 0.0;
    const auto frame = synth_wind(spec);
    for (std::size_t i = 0; i < frame.rows(); ++i) {
        const double t = static_cast<double>(i);
        const double expect = circular::wrap_degrees(
            spec.base_direction + spec.drift_per_step * t +
            spec.diurnal_amplitude * std::sin(2.0 * M_PI * t / spec.diurnal_period_steps));
        CHECK(frame.dir2[i] == Approx(expect).margin(1e-12));
        CHECK(frame.speed2[i] == Approx(spec.speed_mean));
    }
}

TEST_CASE("synth_wind validates its spec", "[data]") {
    SynthSpec bad;
    bad.n_steps = 10;
    CHECK_THROWS_AS(synth_wind(bad), std::invalid_argument);
    bad = SynthSpec{};
    bad.noise_phi = 1.0;
    CHECK_THROWS_AS(synth_wind(bad), std::invalid_argument);
}

TEST_CASE("frame CSV round trip is stable", "[data]") {
    SynthSpec spec;
    spec.n_steps = 250;
    const auto frame = synth_wind(spec);
    const auto path = scratch_dir() / "roundtrip.csv";
    write_frame_csv(frame, CsvSchema{}, path.string(), "");
    const auto parsed = parse_csv(path.string(), CsvSchema{});
    const auto frame2 = clean_and_grid(parsed.records);
    CHECK(frames_equal(frame, frame2));
}
