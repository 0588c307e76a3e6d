#include "wavehits/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wavehits/circular.hpp"
#include "wavehits/util.hpp"

namespace wavehits::data {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::optional<double> parse_double(const std::string& text) {
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yr + (m <= 2));
}

struct WindCell {
    bool present = false;
    double speed = 0.0;
    double dir = 0.0;
};

// Linear interpolation of two wind observations through u/v space;
// degree-space interpolation would be wrong across the north boundary.
WindCell lerp_wind(const WindCell& a, const WindCell& b, double w) {
    const auto ua = circular::to_uv({a.speed, a.dir, false});
    const auto ub = circular::to_uv({b.speed, b.dir, false});
    const circular::UVPair mid{ua.u + (ub.u - ua.u) * w, ua.v + (ub.v - ua.v) * w};
    const auto sample = circular::from_uv(mid);
    return {true, sample.speed, sample.direction};
}

constexpr std::size_t kMaxInterpolableGap = 3;

}  // namespace

std::size_t ParseReport::total_warnings() const {
    std::size_t n = 0;
    for (const auto& [col, count] : invalid_cells) n += count;
    for (const auto& [col, count] : clamped_cells) n += count;
    return n;
}

std::string ParseReport::summary() const {
    std::ostringstream os;
    os << "rows parsed: " << rows_parsed << "\n";
    os << "warnings: " << total_warnings() << "\n";
    for (const auto& [col, count] : invalid_cells)
        os << "  invalid cells in '" << col << "': " << count << "\n";
    for (const auto& [col, count] : clamped_cells)
        os << "  clamped cells in '" << col << "': " << count << "\n";
    for (const auto& note : notes) os << "  note: " << note << "\n";
    return os.str();
}

std::int64_t civil_to_epoch(int year, int month, int day, int hour, int minute, int second) {
    return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
}

std::string epoch_to_iso(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                  static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

std::optional<std::int64_t> parse_timestamp(const std::string& text, const std::string& format) {
    int y = 1970, mo = 1, d = 1, h = 0, mi = 0, s = 0;
    std::size_t ti = 0;
    for (std::size_t fi = 0; fi < format.size(); ++fi) {
        if (format[fi] == '%' && fi + 1 < format.size()) {
            const char tok = format[++fi];
            const std::size_t max_digits = (tok == 'Y') ? 4 : 2;
            std::size_t start = ti, digits = 0;
            while (ti < text.size() && digits < max_digits &&
                   std::isdigit(static_cast<unsigned char>(text[ti]))) {
                ++ti;
                ++digits;
            }
            if (digits == 0) return std::nullopt;
            int value = 0;
            std::from_chars(text.data() + start, text.data() + ti, value);
            switch (tok) {
                case 'Y': y = value; break;
                case 'm': mo = value; break;
                case 'd': d = value; break;
                case 'H': h = value; break;
                case 'M': mi = value; break;
                case 'S': s = value; break;
                default: return std::nullopt;
            }
        } else {
            if (ti >= text.size() || text[ti] != format[fi]) return std::nullopt;
            ++ti;
        }
    }
    if (ti != text.size()) return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) return std::nullopt;
    return civil_to_epoch(y, mo, d, h, mi, s);
}

namespace {

std::string format_timestamp(std::int64_t epoch, const std::string& format) {
    std::int64_t days = epoch / 86400;
    std::int64_t rem = epoch % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y, mo, d;
    civil_from_days(days, y, mo, d);
    const int h = static_cast<int>(rem / 3600);
    const int mi = static_cast<int>((rem / 60) % 60);
    const int s = static_cast<int>(rem % 60);
    std::string out;
    for (std::size_t fi = 0; fi < format.size(); ++fi) {
        if (format[fi] == '%' && fi + 1 < format.size()) {
            char buf[16];
            switch (format[++fi]) {
                case 'Y': std::snprintf(buf, sizeof(buf), "%04d", y); break;
                case 'm': std::snprintf(buf, sizeof(buf), "%02d", mo); break;
                case 'd': std::snprintf(buf, sizeof(buf), "%02d", d); break;
                case 'H': std::snprintf(buf, sizeof(buf), "%02d", h); break;
                case 'M': std::snprintf(buf, sizeof(buf), "%02d", mi); break;
                case 'S': std::snprintf(buf, sizeof(buf), "%02d", s); break;
                default: buf[0] = format[fi]; buf[1] = '\0'; break;
            }
            out += buf;
        } else {
            out += format[fi];
        }
    }
    return out;
}

}  // namespace

const char* channel_name(std::size_t channel) {
    static const char* names[kNumChannels] = {"u2",       "v2",          "u10",
                                              "v10",      "pressure",    "temperature",
                                              "humidity", "precipitation"};
    return channel < kNumChannels ? names[channel] : "?";
}

ParseResult parse_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_csv: cannot open '" + path + "'");

    std::string line;
    // Skip provenance comments ahead of the header.
    do {
        if (!std::getline(in, line)) throw std::runtime_error("parse_csv: empty file: " + path);
    } while (!line.empty() && line[0] == '#');

    const auto header = split_csv_line(line);
    auto find_col = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };

    const int c_time = find_col(schema.timestamp_column);
    const int c_speed2 = find_col(schema.wind_speed_2min_column);
    const int c_dir2 = find_col(schema.wind_dir_2min_column);
    if (c_time < 0)
        throw std::runtime_error("parse_csv: mandatory column '" + schema.timestamp_column +
                                 "' not found in " + path);
    if (c_speed2 < 0 || c_dir2 < 0)
        throw std::runtime_error("parse_csv: mandatory 2-minute wind columns not found in " + path);

    const int c_pressure = find_col(schema.pressure_column);
    const int c_temperature = find_col(schema.temperature_column);
    const int c_humidity = find_col(schema.humidity_column);
    const int c_precip = find_col(schema.precipitation_column);
    const int c_speed10 = find_col(schema.wind_speed_10min_column);
    const int c_dir10 = find_col(schema.wind_dir_10min_column);

    ParseResult result;
    auto cell_at = [](const std::vector<std::string>& cells, int idx) -> std::string {
        if (idx < 0 || static_cast<std::size_t>(idx) >= cells.size()) return "";
        return cells[static_cast<std::size_t>(idx)];
    };

    auto take_value = [&](const std::vector<std::string>& cells, int idx,
                          const std::string& name,
                          auto&& validate) -> std::optional<double> {
        const std::string text = cell_at(cells, idx);
        if (text.empty()) return std::nullopt;
        auto value = parse_double(text);
        if (!value) {
            ++result.report.invalid_cells[name];
            return std::nullopt;
        }
        return validate(*value);
    };

    auto any_value = [](double v) -> std::optional<double> { return v; };
    auto non_negative = [&](const std::string& name) {
        return [&result, name](double v) -> std::optional<double> {
            if (v < 0.0) {
                ++result.report.invalid_cells[name];
                return std::nullopt;
            }
            return v;
        };
    };
    auto direction_valid = [&](const std::string& name) {
        return [&result, name](double v) -> std::optional<double> {
            if (v == 360.0) {  // common encoding of north; fold onto 0
                ++result.report.clamped_cells[name];
                return 0.0;
            }
            if (v < 0.0 || v > 360.0) {
                ++result.report.invalid_cells[name];
                return std::nullopt;
            }
            return v;
        };
    };
    auto humidity_valid = [&](const std::string& name) {
        return [&result, name](double v) -> std::optional<double> {
            if (v < 0.0 || v > 100.0) {
                ++result.report.invalid_cells[name];
                return std::nullopt;
            }
            return v;
        };
    };

    while (std::getline(in, line)) {
        if (trim(line).empty() || line[0] == '#') continue;
        const auto cells = split_csv_line(line);
        const std::string ts_text = cell_at(cells, c_time);
        const auto ts = parse_timestamp(ts_text, schema.timestamp_format);
        if (!ts) {
            ++result.report.invalid_cells[schema.timestamp_column];
            continue;  // a record is unusable without its timestamp
        }
        MeteoRecord rec;
        rec.timestamp = *ts;
        rec.pressure = take_value(cells, c_pressure, schema.pressure_column, any_value);
        rec.temperature = take_value(cells, c_temperature, schema.temperature_column, any_value);
        rec.humidity = take_value(cells, c_humidity, schema.humidity_column,
                                  humidity_valid(schema.humidity_column));
        rec.precipitation = take_value(cells, c_precip, schema.precipitation_column,
                                       non_negative(schema.precipitation_column));
        rec.wind_speed_2min = take_value(cells, c_speed2, schema.wind_speed_2min_column,
                                         non_negative(schema.wind_speed_2min_column));
        rec.wind_dir_2min = take_value(cells, c_dir2, schema.wind_dir_2min_column,
                                       direction_valid(schema.wind_dir_2min_column));
        rec.wind_speed_10min = take_value(cells, c_speed10, schema.wind_speed_10min_column,
                                          non_negative(schema.wind_speed_10min_column));
        rec.wind_dir_10min = take_value(cells, c_dir10, schema.wind_dir_10min_column,
                                        direction_valid(schema.wind_dir_10min_column));
        result.records.push_back(rec);
        ++result.report.rows_parsed;
    }

    if (result.records.empty())
        throw std::runtime_error("parse_csv: no data rows in " + path);
    return result;
}

std::uint64_t FrameSet::fingerprint() const {
    std::uint64_t h = util::fnv1a64(timestamps.data(), timestamps.size() * sizeof(std::int64_t));
    auto mix = [&h](const std::vector<double>& v) {
        h = util::fnv1a64(v.data(), v.size() * sizeof(double), h);
    };
    mix(speed2);
    mix(dir2);
    mix(speed10);
    mix(dir10);
    for (const auto& ch : channels) mix(ch);
    return h;
}

std::string CleanReport::summary() const {
    std::ostringstream os;
    os << "records in: " << input_records << "\n"
       << "duplicate grid slots: " << duplicate_slots << "\n"
       << "interpolated slots: " << interpolated_slots << "\n"
       << "interpolated cells: " << interpolated_cells << "\n"
       << "stitched gaps: " << stitched_gaps << "\n"
       << "dropped slots: " << dropped_slots << "\n"
       << "zero-filled channels: " << zero_filled_channels << "\n";
    return os.str();
}

FrameSet clean_and_grid(std::span<const MeteoRecord> records, CleanReport* report) {
    if (records.empty()) throw std::invalid_argument("clean_and_grid: no records");
    CleanReport local;
    CleanReport& rep = report ? *report : local;
    rep = CleanReport{};
    rep.input_records = records.size();

    // Snap to the 10-minute grid; first record wins a contested slot.
    std::vector<const MeteoRecord*> sorted;
    sorted.reserve(records.size());
    for (const auto& r : records) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const MeteoRecord* a, const MeteoRecord* b) {
                         return a->timestamp < b->timestamp;
                     });

    auto slot_of = [](std::int64_t t) {
        return static_cast<std::int64_t>(
                   std::llround(static_cast<double>(t) / kGridStepSeconds)) *
               kGridStepSeconds;
    };

    const std::int64_t slot_min = slot_of(sorted.front()->timestamp);
    const std::int64_t slot_max = slot_of(sorted.back()->timestamp);
    const std::size_t n_slots =
        static_cast<std::size_t>((slot_max - slot_min) / kGridStepSeconds) + 1;

    std::vector<const MeteoRecord*> grid(n_slots, nullptr);
    for (const MeteoRecord* r : sorted) {
        const std::size_t idx =
            static_cast<std::size_t>((slot_of(r->timestamp) - slot_min) / kGridStepSeconds);
        if (grid[idx]) {
            ++rep.duplicate_slots;
            continue;
        }
        grid[idx] = r;
    }

    // Per-slot cell state.
    std::vector<WindCell> wind2(n_slots), wind10(n_slots);
    std::array<std::vector<double>, 4> scalars;  // pressure, temperature, humidity, precip
    std::array<std::vector<bool>, 4> scalar_present;
    for (auto& s : scalars) s.assign(n_slots, 0.0);
    for (auto& p : scalar_present) p.assign(n_slots, false);

    auto wind_from = [](const std::optional<double>& speed,
                        const std::optional<double>& dir) -> WindCell {
        if (!speed) return {};
        if (!dir) {
            if (*speed == 0.0) return {true, 0.0, 0.0};  // calm: direction undefined anyway
            return {};
        }
        return {true, *speed, *dir};
    };

    for (std::size_t i = 0; i < n_slots; ++i) {
        const MeteoRecord* r = grid[i];
        if (!r) continue;
        wind2[i] = wind_from(r->wind_speed_2min, r->wind_dir_2min);
        wind10[i] = wind_from(r->wind_speed_10min, r->wind_dir_10min);
        const std::optional<double>* fields[4] = {&r->pressure, &r->temperature, &r->humidity,
                                                  &r->precipitation};
        for (int f = 0; f < 4; ++f)
            if (*fields[f]) {
                scalars[static_cast<std::size_t>(f)][i] = **fields[f];
                scalar_present[static_cast<std::size_t>(f)][i] = true;
            }
    }

    // Segment the grid on target (2-minute wind) availability: runs of at
    // most kMaxInterpolableGap missing slots are fillable, longer runs and
    // edge runs become stitches.
    bool any_target = false;
    for (std::size_t i = 0; i < n_slots; ++i) any_target |= wind2[i].present;
    if (!any_target)
        throw std::runtime_error("clean_and_grid: target wind channel has no usable data");

    std::vector<std::pair<std::size_t, std::size_t>> slot_segments;
    {
        std::size_t i = 0;
        while (i < n_slots && !wind2[i].present) ++i;
        rep.dropped_slots += i;
        std::size_t seg_begin = i;
        while (i < n_slots) {
            if (wind2[i].present) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < n_slots && !wind2[j].present) ++j;
            const std::size_t run = j - i;
            if (j == n_slots) {  // trailing edge run
                slot_segments.emplace_back(seg_begin, i);
                rep.dropped_slots += run;
                seg_begin = j;
            } else if (run > kMaxInterpolableGap) {
                slot_segments.emplace_back(seg_begin, i);
                ++rep.stitched_gaps;
                rep.dropped_slots += run;
                seg_begin = j;
            } else {
                rep.interpolated_slots += run;
            }
            i = j;
        }
        if (seg_begin < n_slots) slot_segments.emplace_back(seg_begin, n_slots);
    }

    // Fill missing cells inside each segment: winds through u/v space,
    // scalars linearly, edges by nearest value.
    auto fill_wind = [&](std::vector<WindCell>& cells, std::size_t begin, std::size_t end,
                         bool* any_filled) {
        std::vector<std::size_t> present;
        for (std::size_t i = begin; i < end; ++i)
            if (cells[i].present) present.push_back(i);
        if (present.empty()) {
            for (std::size_t i = begin; i < end; ++i) cells[i] = {true, 0.0, 0.0};
            if (any_filled) *any_filled = true;
            return;
        }
        for (std::size_t i = begin; i < end; ++i) {
            if (cells[i].present) continue;
            ++rep.interpolated_cells;
            auto next = std::lower_bound(present.begin(), present.end(), i);
            if (next == present.begin()) {
                cells[i] = cells[present.front()];
            } else if (next == present.end()) {
                cells[i] = cells[present.back()];
            } else {
                const std::size_t b = *next, a = *(next - 1);
                cells[i] = lerp_wind(cells[a], cells[b],
                                     static_cast<double>(i - a) / static_cast<double>(b - a));
            }
        }
    };

    auto fill_scalar = [&](std::vector<double>& values, std::vector<bool>& present_mask,
                           std::size_t begin, std::size_t end, double fallback,
                           bool* used_fallback) {
        std::vector<std::size_t> present;
        for (std::size_t i = begin; i < end; ++i)
            if (present_mask[i]) present.push_back(i);
        if (present.empty()) {
            for (std::size_t i = begin; i < end; ++i) values[i] = fallback;
            if (used_fallback) *used_fallback = true;
            return;
        }
        for (std::size_t i = begin; i < end; ++i) {
            if (present_mask[i]) continue;
            ++rep.interpolated_cells;
            auto next = std::lower_bound(present.begin(), present.end(), i);
            if (next == present.begin()) {
                values[i] = values[present.front()];
            } else if (next == present.end()) {
                values[i] = values[present.back()];
            } else {
                const std::size_t b = *next, a = *(next - 1);
                const double w = static_cast<double>(i - a) / static_cast<double>(b - a);
                values[i] = values[a] + (values[b] - values[a]) * w;
            }
        }
    };

    std::array<double, 4> scalar_fallback{};
    std::array<bool, 4> scalar_has_any{};
    for (int f = 0; f < 4; ++f) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < n_slots; ++i)
            if (scalar_present[static_cast<std::size_t>(f)][i]) {
                sum += scalars[static_cast<std::size_t>(f)][i];
                ++n;
            }
        scalar_has_any[static_cast<std::size_t>(f)] = n > 0;
        scalar_fallback[static_cast<std::size_t>(f)] = n > 0 ? sum / static_cast<double>(n) : 0.0;
        if (n == 0) ++rep.zero_filled_channels;
    }

    for (const auto& [begin, end] : slot_segments) {
        fill_wind(wind2, begin, end, nullptr);
        bool wind10_zeroed = false;
        fill_wind(wind10, begin, end, &wind10_zeroed);
        for (int f = 0; f < 4; ++f)
            fill_scalar(scalars[static_cast<std::size_t>(f)],
                        scalar_present[static_cast<std::size_t>(f)], begin, end,
                        scalar_fallback[static_cast<std::size_t>(f)], nullptr);
    }

    FrameSet frame;
    for (const auto& [begin, end] : slot_segments) {
        const std::size_t row_begin = frame.rows();
        for (std::size_t i = begin; i < end; ++i) {
            frame.timestamps.push_back(slot_min +
                                       static_cast<std::int64_t>(i) * kGridStepSeconds);
            frame.speed2.push_back(wind2[i].speed);
            frame.dir2.push_back(wind2[i].dir);
            frame.speed10.push_back(wind10[i].speed);
            frame.dir10.push_back(wind10[i].dir);
            frame.channels[kPressure].push_back(scalars[0][i]);
            frame.channels[kTemperature].push_back(scalars[1][i]);
            frame.channels[kHumidity].push_back(scalars[2][i]);
            frame.channels[kPrecipitation].push_back(scalars[3][i]);
        }
        frame.segments.emplace_back(row_begin, frame.rows());
    }
    derive_targets(frame);
    return frame;
}

void derive_targets(FrameSet& frame) {
    const std::size_t n = frame.rows();
    frame.channels[kU2].resize(n);
    frame.channels[kV2].resize(n);
    frame.channels[kU10].resize(n);
    frame.channels[kV10].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto uv2 = circular::to_uv({frame.speed2[i], frame.dir2[i], false});
        const auto uv10 = circular::to_uv({frame.speed10[i], frame.dir10[i], false});
        frame.channels[kU2][i] = uv2.u;
        frame.channels[kV2][i] = uv2.v;
        frame.channels[kU10][i] = uv10.u;
        frame.channels[kV10][i] = uv10.v;
    }
}

double Scaler::apply(std::size_t channel, double x) const {
    if (passthrough[channel]) return x;
    return (x - mean[channel]) / stddev[channel];
}

double Scaler::invert(std::size_t channel, double x) const {
    if (passthrough[channel]) return x;
    return x * stddev[channel] + mean[channel];
}

Scaler Scaler::identity(std::size_t channels) {
    Scaler s;
    s.mean.assign(channels, 0.0);
    s.stddev.assign(channels, 1.0);
    s.passthrough.assign(channels, true);
    return s;
}

Scaler fit_scaler(std::span<const std::vector<double>> channels, std::size_t row_begin,
                  std::size_t row_end) {
    if (row_end <= row_begin) throw std::invalid_argument("fit_scaler: empty training range");
    Scaler scaler;
    const double n = static_cast<double>(row_end - row_begin);
    for (const auto& channel : channels) {
        if (channel.size() < row_end)
            throw std::invalid_argument("fit_scaler: training range exceeds channel length");
        double mean = 0.0;
        for (std::size_t i = row_begin; i < row_end; ++i) mean += channel[i];
        mean /= n;
        double var = 0.0;
        for (std::size_t i = row_begin; i < row_end; ++i)
            var += (channel[i] - mean) * (channel[i] - mean);
        var /= n;  // population variance
        const double sd = std::sqrt(var);
        const bool constant = sd <= 0.0;
        scaler.mean.push_back(constant ? 0.0 : mean);
        scaler.stddev.push_back(constant ? 1.0 : sd);
        scaler.passthrough.push_back(constant);
    }
    return scaler;
}

WindowSet make_windows(const FrameSet& frame, std::size_t input_length, std::size_t horizon,
                       std::array<double, 3> fractions) {
    if (input_length == 0 || horizon == 0)
        throw std::invalid_argument("make_windows: input length and horizon must be positive");
    const double frac_sum = fractions[0] + fractions[1] + fractions[2];
    if (fractions[0] < 0 || fractions[1] < 0 || fractions[2] < 0 ||
        std::fabs(frac_sum - 1.0) > 1e-9)
        throw std::invalid_argument("make_windows: split fractions must be >= 0 and sum to 1");

    WindowSet set;
    set.input_length = input_length;
    set.horizon = horizon;
    const std::size_t span = input_length + horizon;
    for (const auto& [begin, end] : frame.segments) {
        if (end - begin < span) continue;
        for (std::size_t start = begin; start + span <= end; ++start)
            set.windows.push_back({start, Split::train});
    }
    if (set.windows.empty())
        throw std::invalid_argument(
            "make_windows: no contiguous segment is long enough for L + H = " +
            std::to_string(span) + " rows");

    const std::size_t total = set.windows.size();
    const auto n_train = static_cast<std::size_t>(std::floor(fractions[0] * static_cast<double>(total)));
    const auto n_val = static_cast<std::size_t>(std::floor(fractions[1] * static_cast<double>(total)));
    for (std::size_t i = 0; i < total; ++i) {
        if (i < n_train)
            set.windows[i].split = Split::train;
        else if (i < n_train + n_val)
            set.windows[i].split = Split::validation;
        else
            set.windows[i].split = Split::test;
        ++set.split_counts[static_cast<std::size_t>(set.windows[i].split)];
    }
    set.train_row_end = n_train > 0 ? set.windows[n_train - 1].start_row + span : 0;
    return set;
}

FrameSet synth_wind(const SynthSpec& spec) {
    if (spec.n_steps < 200)
        throw std::invalid_argument("synth_wind: need at least 200 steps");
    if (spec.diurnal_period_steps <= 0.0 || spec.noise_std < 0.0 || spec.speed_std < 0.0 ||
        spec.speed_mean <= 0.0 || spec.noise_phi < 0.0 || spec.noise_phi >= 1.0 ||
        spec.speed_phi < 0.0 || spec.speed_phi >= 1.0)
        throw std::invalid_argument("synth_wind: invalid regime parameters");

    const std::size_t n = spec.n_steps;
    util::GaussianSampler g_dir(util::mix_seed(spec.seed, 1));
    util::GaussianSampler g_speed(util::mix_seed(spec.seed, 2));
    util::GaussianSampler g_pressure(util::mix_seed(spec.seed, 3));
    util::GaussianSampler g_temp(util::mix_seed(spec.seed, 4));
    util::GaussianSampler g_hum(util::mix_seed(spec.seed, 5));
    util::GaussianSampler g_precip(util::mix_seed(spec.seed, 6));

    auto ar1 = [](double phi, double stationary_std, util::GaussianSampler& g, std::size_t n) {
        std::vector<double> x(n);
        const double innov = stationary_std * std::sqrt(std::max(0.0, 1.0 - phi * phi));
        double state = stationary_std > 0.0 ? stationary_std * g() : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = state;
            state = phi * state + innov * g();
        }
        return x;
    };

    const auto dir_noise = ar1(spec.noise_phi, spec.noise_std, g_dir, n);
    const auto speed_noise = ar1(spec.speed_phi, spec.speed_std, g_speed, n);
    const auto pressure_noise = ar1(0.97, 2.0, g_pressure, n);
    const auto temp_noise = ar1(0.95, 1.5, g_temp, n);
    const auto hum_noise = ar1(0.90, 5.0, g_hum, n);
    const auto precip_noise = ar1(0.93, 1.2, g_precip, n);

    FrameSet frame;
    frame.timestamps.resize(n);
    frame.speed2.resize(n);
    frame.dir2.resize(n);
    frame.speed10.resize(n);
    frame.dir10.resize(n);
    for (auto& ch : frame.channels) ch.resize(n);

    const double omega = 2.0 * M_PI / spec.diurnal_period_steps;
    double ema_u = 0.0, ema_v = 0.0;
    const double ema_alpha = 0.35;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i);
        const double deterministic =
            spec.base_direction + spec.drift_per_step * t + spec.diurnal_amplitude * std::sin(omega * t);
        const double dir = circular::wrap_degrees(deterministic + dir_noise[i]);
        const double speed = std::max(spec.speed_floor, spec.speed_mean + speed_noise[i]);

        frame.timestamps[i] = spec.start_timestamp + static_cast<std::int64_t>(i) * kGridStepSeconds;
        frame.speed2[i] = speed;
        frame.dir2[i] = dir;

        const auto uv = circular::to_uv({speed, dir, false});
        if (i == 0) {
            ema_u = uv.u;
            ema_v = uv.v;
        } else {
            ema_u += ema_alpha * (uv.u - ema_u);
            ema_v += ema_alpha * (uv.v - ema_v);
        }
        const auto smoothed = circular::from_uv({ema_u, ema_v});
        frame.speed10[i] = smoothed.speed;
        frame.dir10[i] = smoothed.calm ? 0.0 : smoothed.direction;

        frame.channels[kPressure][i] =
            1000.0 + 8.0 * std::sin(omega * t / 30.0) + pressure_noise[i];
        frame.channels[kTemperature][i] =
            15.0 + 8.0 * std::sin(omega * t - M_PI / 3.0) + temp_noise[i];
        frame.channels[kHumidity][i] =
            std::clamp(60.0 - 0.8 * (frame.channels[kTemperature][i] - 15.0) + hum_noise[i], 0.0,
                       100.0);
        frame.channels[kPrecipitation][i] = std::max(0.0, precip_noise[i] - 2.2);
    }
    frame.segments.emplace_back(0, n);
    derive_targets(frame);
    return frame;
}

std::size_t count_north_crossings(std::span<const double> directions_deg) {
    std::size_t crossings = 0;
    for (std::size_t i = 1; i < directions_deg.size(); ++i)
        if (std::fabs(directions_deg[i] - directions_deg[i - 1]) > 180.0) ++crossings;
    return crossings;
}

void write_frame_csv(const FrameSet& frame, const CsvSchema& schema, const std::string& path,
                     const std::string& provenance_header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_frame_csv: cannot open '" + path + "' for writing");
    out << provenance_header;
    out << schema.timestamp_column << ',' << schema.pressure_column << ','
        << schema.temperature_column << ',' << schema.humidity_column << ','
        << schema.precipitation_column << ',' << schema.wind_speed_2min_column << ','
        << schema.wind_dir_2min_column << ',' << schema.wind_speed_10min_column << ','
        << schema.wind_dir_10min_column << '\n';
    char buf[512];
    for (std::size_t i = 0; i < frame.rows(); ++i) {
        std::snprintf(buf, sizeof(buf),
                      "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      format_timestamp(frame.timestamps[i], schema.timestamp_format).c_str(),
                      frame.channels[kPressure][i], frame.channels[kTemperature][i],
                      frame.channels[kHumidity][i], frame.channels[kPrecipitation][i],
                      frame.speed2[i], frame.dir2[i], frame.speed10[i], frame.dir10[i]);
        out << buf;
    }
    if (!out) throw std::runtime_error("write_frame_csv: write failure on '" + path + "'");
}

}  // namespace wavehits::data
