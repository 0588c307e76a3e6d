#include "wavehits/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "wavehits/util.hpp"

namespace wavehits::config {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
        throw std::invalid_argument("config: bad numeric value for '" + key + "': " + text);
    return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
        throw std::invalid_argument("config: bad integer value for '" + key + "': " + text);
    return v;
}

std::int64_t to_i64(const std::string& key, const std::string& text) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
        throw std::invalid_argument("config: bad integer value for '" + key + "': " + text);
    return v;
}

template <typename T>
std::vector<T> to_list(const std::string& key, const std::string& text) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(static_cast<T>(to_i64(key, item)));
    }
    if (out.empty()) throw std::invalid_argument("config: empty list for '" + key + "'");
    return out;
}

template <typename T>
std::string list_text(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

std::string double_text(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct KeyEntry {
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
};

using Registry = std::vector<std::pair<std::string, KeyEntry>>;

const Registry& registry() {
    static const Registry table = [] {
        Registry r;
        auto add_string = [&r](const std::string& key, std::string ExperimentConfig::*field) {
            r.push_back({key,
                         {[field](const ExperimentConfig& c) { return c.*field; },
                          [field](ExperimentConfig& c, const std::string&, const std::string& v) {
                              c.*field = v;
                          }}});
        };
        auto add_double = [&r](const std::string& key, double ExperimentConfig::*field) {
            r.push_back({key,
                         {[field](const ExperimentConfig& c) { return double_text(c.*field); },
                          [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
                              c.*field = to_double(k, v);
                          }}});
        };
        auto add_size = [&r](const std::string& key, std::size_t ExperimentConfig::*field) {
            r.push_back({key,
                         {[field](const ExperimentConfig& c) { return std::to_string(c.*field); },
                          [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
                              c.*field = static_cast<std::size_t>(to_u64(k, v));
                          }}});
        };

        add_string("data.source", &ExperimentConfig::source);
        add_string("data.csv_path", &ExperimentConfig::csv_path);

        auto add_schema = [&r](const std::string& key, std::string data::CsvSchema::*field) {
            r.push_back({key,
                         {[field](const ExperimentConfig& c) { return c.schema.*field; },
                          [field](ExperimentConfig& c, const std::string&, const std::string& v) {
                              c.schema.*field = v;
                          }}});
        };
        add_schema("data.timestamp_column", &data::CsvSchema::timestamp_column);
        add_schema("data.timestamp_format", &data::CsvSchema::timestamp_format);
        add_schema("data.pressure_column", &data::CsvSchema::pressure_column);
        add_schema("data.temperature_column", &data::CsvSchema::temperature_column);
        add_schema("data.humidity_column", &data::CsvSchema::humidity_column);
        add_schema("data.precipitation_column", &data::CsvSchema::precipitation_column);
        add_schema("data.wind_speed_2min_column", &data::CsvSchema::wind_speed_2min_column);
        add_schema("data.wind_dir_2min_column", &data::CsvSchema::wind_dir_2min_column);
        add_schema("data.wind_speed_10min_column", &data::CsvSchema::wind_speed_10min_column);
        add_schema("data.wind_dir_10min_column", &data::CsvSchema::wind_dir_10min_column);

        auto add_synth_d = [&r](const std::string& key, double data::SynthSpec::*field) {
            r.push_back({key,
                         {[field](const ExperimentConfig& c) { return double_text(c.synth.*field); },
                          [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
                              c.synth.*field = to_double(k, v);
                          }}});
        };
        r.push_back({"data.synth_seed",
                     {[](const ExperimentConfig& c) { return std::to_string(c.synth.seed); },
                      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                          c.synth.seed = to_u64(k, v);
                      }}});
        r.push_back({"data.synth_steps",
                     {[](const ExperimentConfig& c) { return std::to_string(c.synth.n_steps); },
                      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                          c.synth.n_steps = static_cast<std::size_t>(to_u64(k, v));
                      }}});
        add_synth_d("data.synth_base_direction", &data::SynthSpec::base_direction);
        add_synth_d("data.synth_drift_per_step", &data::SynthSpec::drift_per_step);
        add_synth_d("data.synth_diurnal_amplitude", &data::SynthSpec::diurnal_amplitude);
        add_synth_d("data.synth_diurnal_period", &data::SynthSpec::diurnal_period_steps);
        add_synth_d("data.synth_noise_std", &data::SynthSpec::noise_std);
        add_synth_d("data.synth_noise_phi", &data::SynthSpec::noise_phi);
        add_synth_d("data.synth_speed_mean", &data::SynthSpec::speed_mean);
        add_synth_d("data.synth_speed_std", &data::SynthSpec::speed_std);
        add_synth_d("data.synth_speed_phi", &data::SynthSpec::speed_phi);
        add_synth_d("data.synth_speed_floor", &data::SynthSpec::speed_floor);

        add_string("wavelet.name", &ExperimentConfig::wavelet_name);
        r.push_back({"wavelet.levels",
                     {[](const ExperimentConfig& c) { return std::to_string(c.wavelet_levels); },
                      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                          c.wavelet_levels = static_cast<int>(to_i64(k, v));
                      }}});
        add_string("wavelet.boundary", &ExperimentConfig::wavelet_boundary);
        r.push_back({"wavelet.denoise_keep",
                     {[](const ExperimentConfig& c) { return std::to_string(c.denoise_keep); },
                      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                          c.denoise_keep = static_cast<int>(to_i64(k, v));
                      }}});

        r.push_back({"model.variant",
                     {[](const ExperimentConfig& c) { return variant_name(c.variant); },
                      [](ExperimentConfig& c, const std::string&, const std::string& v) {
                          c.variant = parse_variant(v);
                      }}});
        add_size("model.input_length", &ExperimentConfig::input_length);
        add_size("model.horizon", &ExperimentConfig::horizon);
        r.push_back({"model.pool_kernels",
                     {[](const ExperimentConfig& c) { return list_text(c.pool_kernels); },
                      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                          c.pool_kernels = to_list<int>(k, v);
                      }}});
        r.push_back({"model.hidden_widths",
                     {[](const ExperimentConfig& c) { return list_text(c.hidden_widths); },
                      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                          c.hidden_widths = to_list<std::size_t>(k, v);
                      }}});
        r.push_back({"model.forecast_knots",
                     {[](const ExperimentConfig& c) { return list_text(c.forecast_knots); },
                      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                          c.forecast_knots = to_list<std::size_t>(k, v);
                      }}});
        r.push_back({"model.backcast_knots",
                     {[](const ExperimentConfig& c) { return list_text(c.backcast_knots); },
                      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                          c.backcast_knots = to_list<std::size_t>(k, v);
                      }}});

        add_double("train.learning_rate", &ExperimentConfig::learning_rate);
        add_double("train.beta1", &ExperimentConfig::beta1);
        add_double("train.beta2", &ExperimentConfig::beta2);
        add_double("train.epsilon", &ExperimentConfig::epsilon);
        add_size("train.batch_size", &ExperimentConfig::batch_size);
        add_size("train.max_epochs", &ExperimentConfig::max_epochs);
        add_size("train.patience", &ExperimentConfig::patience);
        r.push_back({"train.seed",
                     {[](const ExperimentConfig& c) { return std::to_string(c.seed); },
                      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                          c.seed = to_u64(k, v);
                      }}});
        add_double("train.train_fraction", &ExperimentConfig::train_fraction);
        add_double("train.val_fraction", &ExperimentConfig::val_fraction);
        add_double("train.test_fraction", &ExperimentConfig::test_fraction);

        add_double("eval.hr_delta", &ExperimentConfig::hr_delta);

        add_double("selfcheck.roundtrip_tol", &ExperimentConfig::selfcheck_roundtrip_tol);
        add_double("selfcheck.wavelet_tol", &ExperimentConfig::selfcheck_wavelet_tol);
        add_double("selfcheck.metric_tol", &ExperimentConfig::selfcheck_metric_tol);
        add_double("selfcheck.grad_tol", &ExperimentConfig::selfcheck_grad_tol);
        return r;
    }();
    return table;
}

const KeyEntry& find_key(const std::string& key) {
    for (const auto& [name, entry] : registry())
        if (name == key) return entry;
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

}  // namespace

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::wavehits: return "wavehits";
        case Variant::nhits_uv: return "nhits_uv";
        case Variant::nhits_direct: return "nhits_direct";
        case Variant::persistence: return "persistence";
    }
    return "?";
}

Variant parse_variant(const std::string& name) {
    if (name == "wavehits") return Variant::wavehits;
    if (name == "nhits_uv") return Variant::nhits_uv;
    if (name == "nhits_direct") return Variant::nhits_direct;
    if (name == "persistence") return Variant::persistence;
    throw std::invalid_argument(
        "config: unknown variant '" + name +
        "' (expected wavehits, nhits_uv, nhits_direct or persistence)");
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [name, entry] : registry()) keys.push_back(name);
    return keys;
}

std::string get_value(const ExperimentConfig& cfg, const std::string& key) {
    return find_key(key).get(cfg);
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    find_key(key).set(cfg, key, value);
}

void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& pairs) {
    for (const auto& pair : pairs) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: override must be key=value, got '" + pair + "'");
        apply_override(cfg, trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: malformed section at line " +
                                            std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string dotted = section.empty() ? key : section + "." + key;
        apply_override(cfg, dotted, value);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string canonical_text(const ExperimentConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& [key, entry] : registry()) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) out += "\n";
            out += "[" + sec + "]\n";
            section = sec;
        }
        out += key.substr(dot + 1) + " = " + entry.get(cfg) + "\n";
    }
    return out;
}

std::uint64_t digest(const ExperimentConfig& cfg) {
    return util::fnv1a64(canonical_text(cfg));
}

void validate(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (cfg.source != "csv" && cfg.source != "synth")
        fail("data.source must be 'csv' or 'synth'");
    if (cfg.source == "csv" && cfg.csv_path.empty()) fail("data.csv_path is required");
    if (cfg.wavelet_name != "db4") fail("wavelet.name must be 'db4'");
    if (cfg.wavelet_boundary != "periodic" && cfg.wavelet_boundary != "symmetric")
        fail("wavelet.boundary must be 'periodic' or 'symmetric'");
    if (cfg.wavelet_levels < 1) fail("wavelet.levels must be >= 1");
    if (cfg.denoise_keep < 0 || cfg.denoise_keep > cfg.wavelet_levels)
        fail("wavelet.denoise_keep must be in [0, levels]");
    if (cfg.horizon < 1) fail("model.horizon must be >= 1");
    if (cfg.input_length < 2) fail("model.input_length must be >= 2");
    const std::size_t blocks = cfg.pool_kernels.size();
    if (blocks == 0) fail("model.pool_kernels must name at least one block");
    if (cfg.forecast_knots.size() != blocks || cfg.backcast_knots.size() != blocks)
        fail("model knot lists must have one entry per block");
    for (int k : cfg.pool_kernels)
        if (k < 1) fail("model.pool_kernels entries must be >= 1");
    for (std::size_t k : cfg.forecast_knots)
        if (k < 2 || k > cfg.horizon) fail("model.forecast_knots entries must be in [2, horizon]");
    for (std::size_t k : cfg.backcast_knots)
        if (k < 2 || k > cfg.input_length)
            fail("model.backcast_knots entries must be in [2, input_length]");
    if (cfg.batch_size < 1) fail("train.batch_size must be >= 1");
    if (cfg.max_epochs < 1) fail("train.max_epochs must be >= 1");
    if (cfg.patience < 1) fail("train.patience must be >= 1");
    if (cfg.learning_rate <= 0) fail("train.learning_rate must be positive");
    if (cfg.train_fraction < 0 || cfg.val_fraction < 0 || cfg.test_fraction < 0 ||
        std::fabs(cfg.train_fraction + cfg.val_fraction + cfg.test_fraction - 1.0) > 1e-9)
        fail("split fractions must be non-negative and sum to 1");
    if (cfg.hr_delta < 0) fail("eval.hr_delta must be >= 0");
}

}  // namespace wavehits::config
