#include "wavehits/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wavehits/circular.hpp"
#include "wavehits/util.hpp"
#include "wavehits/wavelet.hpp"

namespace wavehits::pipeline {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

wavelet::Boundary boundary_from(const config::ExperimentConfig& cfg) {
    return cfg.wavelet_boundary == "periodic" ? wavelet::Boundary::periodic
                                              : wavelet::Boundary::symmetric;
}

std::size_t wavelet_rows_per_target(const config::ExperimentConfig& cfg) {
    return static_cast<std::size_t>(cfg.wavelet_levels) + 1;
}

std::size_t base_channel_count(config::Variant variant) {
    return variant == config::Variant::nhits_direct ? data::kNumChannels + 1
                                                    : data::kNumChannels;
}

// Deterministic in-place Fisher-Yates; std::shuffle is implementation-defined.
void shuffle_indices(std::vector<std::size_t>& idx, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng() % i]);
}

}  // namespace

ChannelSet build_channels(config::Variant variant, const data::FrameSet& frame) {
    ChannelSet set;
    if (variant == config::Variant::nhits_direct) {
        // Degrees-as-scalar target plus sin/cos encodings of the same
        // bearing; the raw degrees channel keeps its 0/360 discontinuity.
        const std::size_t n = frame.rows();
        std::vector<double> deg(n), sin_row(n), cos_row(n);
        for (std::size_t i = 0; i < n; ++i) {
            deg[i] = frame.dir2[i];
            sin_row[i] = std::sin(frame.dir2[i] * kDegToRad);
            cos_row[i] = std::cos(frame.dir2[i] * kDegToRad);
        }
        set.rows.push_back(std::move(deg));
        set.names.push_back("dir2_deg");
        set.rows.push_back(std::move(sin_row));
        set.names.push_back("dir2_sin");
        set.rows.push_back(std::move(cos_row));
        set.names.push_back("dir2_cos");
        for (std::size_t c = data::kU10; c < data::kNumChannels; ++c) {
            set.rows.push_back(frame.channels[c]);
            set.names.push_back(data::channel_name(c));
        }
        set.target_rows = {0};
        return set;
    }

    for (std::size_t c = 0; c < data::kNumChannels; ++c) {
        set.rows.push_back(frame.channels[c]);
        set.names.push_back(data::channel_name(c));
    }
    set.target_rows = {data::kU2, data::kV2};
    return set;
}

nhits::ModelSpec model_spec_from(const config::ExperimentConfig& cfg) {
    nhits::ModelSpec spec;
    spec.input_channels = base_channel_count(cfg.variant);
    if (cfg.variant == config::Variant::wavehits)
        spec.input_channels += 2 * wavelet_rows_per_target(cfg);
    spec.input_length = cfg.input_length;
    spec.horizon = cfg.horizon;
    spec.target_channels =
        cfg.variant == config::Variant::nhits_direct ? std::vector<std::size_t>{0}
                                                     : std::vector<std::size_t>{0, 1};
    spec.pool_kernels = cfg.pool_kernels;
    spec.hidden_widths = cfg.hidden_widths;
    spec.backcast_knots = cfg.backcast_knots;
    spec.forecast_knots = cfg.forecast_knots;
    return spec;
}

data::FrameSet load_frame(const config::ExperimentConfig& cfg) {
    if (cfg.source == "csv") {
        auto parsed = data::parse_csv(cfg.csv_path, cfg.schema);
        return data::clean_and_grid(parsed.records);
    }
    return data::synth_wind(cfg.synth);
}

PreparedData prepare(const config::ExperimentConfig& cfg, data::FrameSet frame) {
    config::validate(cfg);
    PreparedData prepared;
    prepared.frame = std::move(frame);
    prepared.data_fingerprint = prepared.frame.fingerprint();

    ChannelSet channels = build_channels(cfg.variant, prepared.frame);
    prepared.base_channels = channels.rows.size();
    prepared.target_rows = channels.target_rows;

    prepared.plan = make_windows(prepared.frame, cfg.input_length, cfg.horizon,
                                 {cfg.train_fraction, cfg.val_fraction, cfg.test_fraction});
    if (prepared.plan.train_row_end == 0)
        throw std::runtime_error("prepare: no training windows at the configured split");
    prepared.scaler = data::fit_scaler(channels.rows, 0, prepared.plan.train_row_end);

    for (std::size_t c = 0; c < channels.rows.size(); ++c)
        for (auto& v : channels.rows[c]) v = prepared.scaler.apply(c, v);

    const bool with_wavelet = cfg.variant == config::Variant::wavehits;
    const std::size_t wl_rows = with_wavelet ? wavelet_rows_per_target(cfg) : 0;
    prepared.model_channels = prepared.base_channels + wl_rows * prepared.target_rows.size();

    wavelet::WaveletSpec wspec;
    if (with_wavelet) wspec = wavelet::WaveletSpec::db4(boundary_from(cfg));
    const bool denoise = with_wavelet && cfg.denoise_keep < cfg.wavelet_levels;

    const std::size_t L = cfg.input_length, H = cfg.horizon;
    const std::size_t n_targets = prepared.target_rows.size();
    prepared.windows.reserve(prepared.plan.windows.size());
    for (const auto& ref : prepared.plan.windows) {
        ModelWindow window;
        window.start_row = ref.start_row;
        window.split = ref.split;
        window.input = nn::Tensor2(prepared.model_channels, L);
        window.target = nn::Tensor2(n_targets, H);

        for (std::size_t c = 0; c < prepared.base_channels; ++c)
            std::copy(channels.rows[c].begin() + static_cast<std::ptrdiff_t>(ref.start_row),
                      channels.rows[c].begin() + static_cast<std::ptrdiff_t>(ref.start_row + L),
                      &window.input.data[c * L]);

        if (with_wavelet) {
            for (std::size_t t = 0; t < n_targets; ++t) {
                double* raw_row = &window.input.data[prepared.target_rows[t] * L];
                auto coeffs = wavelet::wavedec({raw_row, L}, wspec, cfg.wavelet_levels);
                if (denoise) coeffs = wavelet::denoise_lowpass(coeffs, cfg.denoise_keep);
                const auto bands = wavelet::feature_channels(coeffs, wspec);
                for (std::size_t b = 0; b < bands.size(); ++b) {
                    double* dst =
                        &window.input.data[(prepared.base_channels + t * wl_rows + b) * L];
                    std::copy(bands[b].begin(), bands[b].end(), dst);
                }
                if (denoise) {
                    // The raw input row becomes its low-pass reconstruction so
                    // the band rows still sum to it; targets stay untouched.
                    std::fill(raw_row, raw_row + L, 0.0);
                    for (const auto& band : bands)
                        for (std::size_t i = 0; i < L; ++i) raw_row[i] += band[i];
                }
            }
        }

        for (std::size_t t = 0; t < n_targets; ++t)
            for (std::size_t h = 0; h < H; ++h)
                window.target(t, h) =
                    channels.rows[prepared.target_rows[t]][ref.start_row + L + h];

        prepared.windows.push_back(std::move(window));
    }
    return prepared;
}

TrainedArtifact train(const config::ExperimentConfig& cfg, const PreparedData& prepared,
                      const LogFn& log) {
    TrainedArtifact artifact;
    artifact.config = cfg;
    artifact.scaler = prepared.scaler;
    artifact.data_fingerprint = prepared.data_fingerprint;
    if (cfg.variant == config::Variant::persistence) return artifact;

    std::vector<std::size_t> train_idx, val_idx;
    for (std::size_t i = 0; i < prepared.windows.size(); ++i) {
        if (prepared.windows[i].split == data::Split::train) train_idx.push_back(i);
        if (prepared.windows[i].split == data::Split::validation) val_idx.push_back(i);
    }
    if (train_idx.empty() || val_idx.empty())
        throw std::runtime_error("train: empty train or validation split");

    nhits::NhitsModel model = nhits::make_model(model_spec_from(cfg), cfg.seed);
    if (model.input_channels != prepared.model_channels)
        throw std::runtime_error("train: prepared channel count does not match the model");
    auto params = model.parameters();
    nn::AdamConfig adam_cfg{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon};
    nn::AdamState adam(params, adam_cfg);
    auto grads = nn::zero_grads_like(params);

    const std::size_t out_elems = prepared.target_rows.size() * cfg.horizon;

    auto mean_loss = [&](const std::vector<std::size_t>& idx) {
        double acc = 0.0;
        for (std::size_t wi : idx) {
            const auto out = nhits::model_forward(model, prepared.windows[wi].input);
            for (std::size_t i = 0; i < out.forecast.data.size(); ++i) {
                const double d = out.forecast.data[i] - prepared.windows[wi].target.data[i];
                acc += d * d;
            }
        }
        return acc / static_cast<double>(idx.size() * out_elems);
    };

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<nn::Tensor2> best_params;
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        shuffle_indices(train_idx, util::mix_seed(cfg.seed, 0xe90c + epoch));

        double epoch_acc = 0.0;
        for (std::size_t begin = 0; begin < train_idx.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, train_idx.size());
            const double denom = static_cast<double>((end - begin) * out_elems);
            for (auto& g : grads) g.zero();
            for (std::size_t bi = begin; bi < end; ++bi) {
                const ModelWindow& window = prepared.windows[train_idx[bi]];
                nhits::ModelCache cache;
                const auto out = nhits::model_forward(model, window.input, &cache);
                nn::Tensor2 fgrad(out.forecast.rows, out.forecast.cols);
                for (std::size_t i = 0; i < fgrad.data.size(); ++i) {
                    const double d = out.forecast.data[i] - window.target.data[i];
                    fgrad.data[i] = 2.0 * d / denom;
                    epoch_acc += d * d;
                }
                nhits::model_backward(model, cache, fgrad, grads);
            }
            nn::adam_step(params, grads, adam);
        }
        const double train_loss =
            epoch_acc / static_cast<double>(train_idx.size() * out_elems);
        const double val_loss = mean_loss(val_idx);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
            throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));
        artifact.history.train_loss.push_back(train_loss);
        artifact.history.val_loss.push_back(val_loss);
        if (log)
            log("epoch " + std::to_string(epoch) + " train " + std::to_string(train_loss) +
                " val " + std::to_string(val_loss));

        if (val_loss < best_val) {
            best_val = val_loss;
            artifact.history.best_epoch = epoch;
            best_params.clear();
            for (const auto* p : params) best_params.push_back(*p);
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }

    for (std::size_t i = 0; i < params.size(); ++i) *params[i] = best_params[i];
    artifact.model = std::move(model);
    return artifact;
}

DirectionForecast persistence_forecast(const data::FrameSet& frame, std::size_t start_row,
                                       std::size_t input_length, std::size_t horizon) {
    if (start_row + input_length > frame.rows())
        throw std::invalid_argument("persistence_forecast: window exceeds the frame");
    const std::size_t last = start_row + input_length - 1;
    const circular::UVPair uv{frame.channels[data::kU2][last],
                              frame.channels[data::kV2][last]};
    const auto sample = circular::from_uv(uv);
    DirectionForecast out;
    out.direction.assign(horizon, sample.calm ? 0.0 : sample.direction);
    out.speed.assign(horizon, sample.speed);
    out.calm.assign(horizon, sample.calm);
    return out;
}

DirectionForecast forecast_window(const TrainedArtifact& artifact,
                                  const PreparedData& prepared, std::size_t window_index) {
    if (window_index >= prepared.windows.size())
        throw std::invalid_argument("forecast_window: window index out of range");
    const auto& cfg = artifact.config;
    const ModelWindow& window = prepared.windows[window_index];

    if (cfg.variant == config::Variant::persistence)
        return persistence_forecast(prepared.frame, window.start_row, cfg.input_length,
                                    cfg.horizon);

    if (!artifact.has_model())
        throw std::runtime_error("forecast_window: artifact carries no trained model");
    if (artifact.scaler.channels() != prepared.scaler.channels())
        throw std::runtime_error("forecast_window: scaler mismatch between artifact and data");
    if (artifact.model.input_channels != window.input.rows)
        throw std::runtime_error("forecast_window: window shape does not match the model");

    const auto out = nhits::model_forward(artifact.model, window.input);
    DirectionForecast forecast;
    forecast.direction.resize(cfg.horizon);
    forecast.speed.resize(cfg.horizon);
    forecast.calm.resize(cfg.horizon);

    if (cfg.variant == config::Variant::nhits_direct) {
        for (std::size_t h = 0; h < cfg.horizon; ++h) {
            const double deg =
                artifact.scaler.invert(prepared.target_rows[0], out.forecast(0, h));
            forecast.direction[h] = circular::wrap_degrees(deg);
            forecast.speed[h] = 1.0;  // magnitude is not modeled
            forecast.calm[h] = false;
        }
        return forecast;
    }

    for (std::size_t h = 0; h < cfg.horizon; ++h) {
        const circular::UVPair uv{
            artifact.scaler.invert(prepared.target_rows[0], out.forecast(0, h)),
            artifact.scaler.invert(prepared.target_rows[1], out.forecast(1, h))};
        const auto sample = circular::from_uv(uv);
        forecast.direction[h] = sample.calm ? 0.0 : sample.direction;
        forecast.speed[h] = sample.speed;
        forecast.calm[h] = sample.calm;
    }
    return forecast;
}

ForecastReport evaluate_with(const Forecaster& forecaster, const PreparedData& prepared,
                             data::Split split, double hr_delta) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < prepared.windows.size(); ++i)
        if (prepared.windows[i].split == split) idx.push_back(i);
    if (idx.empty()) throw std::runtime_error("evaluate: empty split");

    const std::size_t H = prepared.plan.horizon;
    const std::size_t L = prepared.plan.input_length;

    ForecastReport report;
    report.horizon = H;
    report.hr_delta = hr_delta;
    report.metric_names = {"mae_periodic", "rmse_periodic", "rmae_periodic", "r2_direction",
                           "hr",           "vcc",           "r2_u",          "r2_v",
                           "mae_u",        "rmse_u",        "mae_v",         "rmse_v"};
    for (const auto& name : report.metric_names)
        report.values[name] = std::vector<double>(H, std::numeric_limits<double>::quiet_NaN());
    report.samples_per_step.assign(H, 0);
    report.calm_excluded_per_step.assign(H, 0);

    std::vector<std::vector<double>> pred_dir(H), true_dir(H);
    std::vector<std::vector<circular::UVPair>> pred_uv(H), true_uv(H);

    for (std::size_t wi : idx) {
        const auto forecast = forecaster(wi);
        const std::size_t base = prepared.windows[wi].start_row + L;
        for (std::size_t h = 0; h < H; ++h) {
            const std::size_t row = base + h;
            const double t_speed = prepared.frame.speed2[row];
            const double t_dir = prepared.frame.dir2[row];
            const circular::UVPair t_uv{prepared.frame.channels[data::kU2][row],
                                        prepared.frame.channels[data::kV2][row]};
            const circular::UVPair p_uv =
                circular::to_uv({forecast.speed[h], forecast.direction[h], forecast.calm[h]});

            pred_uv[h].push_back(p_uv);
            true_uv[h].push_back(t_uv);
            if (t_speed == 0.0) {
                ++report.calm_excluded_per_step[h];  // true direction undefined
            } else {
                pred_dir[h].push_back(forecast.direction[h]);
                true_dir[h].push_back(t_dir);
            }
            ++report.samples_per_step[h];
        }
    }

    auto component_series = [](const std::vector<circular::UVPair>& uv, bool u_side) {
        std::vector<double> out(uv.size());
        for (std::size_t i = 0; i < uv.size(); ++i) out[i] = u_side ? uv[i].u : uv[i].v;
        return out;
    };
    auto mae = [](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
        return acc / static_cast<double>(a.size());
    };
    auto rmse = [](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(acc / static_cast<double>(a.size()));
    };

    for (std::size_t h = 0; h < H; ++h) {
        if (!true_dir[h].empty()) {
            report.values["mae_periodic"][h] = circular::mae_periodic(pred_dir[h], true_dir[h]);
            report.values["rmse_periodic"][h] =
                circular::rmse_periodic(pred_dir[h], true_dir[h]);
            report.values["hr"][h] = circular::hit_rate(pred_dir[h], true_dir[h], hr_delta);
            double mean_true = 0.0;
            for (double d : true_dir[h]) mean_true += d;
            mean_true /= static_cast<double>(true_dir[h].size());
            if (mean_true > 0.0)
                report.values["rmae_periodic"][h] =
                    circular::rmae_periodic(pred_dir[h], true_dir[h]);
            // direction-level skill needs angular spread in the truth
            const double mean_dir = circular::circular_mean(true_dir[h]);
            double spread = 0.0;
            for (double d : true_dir[h]) {
                const double s = circular::angular_diff(d, mean_dir);
                spread += s * s;
            }
            if (spread > 0.0)
                report.values["r2_direction"][h] =
                    circular::r2_direction(pred_dir[h], true_dir[h]);
        }

        const auto& pu = pred_uv[h];
        const auto& tu = true_uv[h];
        double norm_p = 0.0, norm_t = 0.0;
        for (std::size_t i = 0; i < pu.size(); ++i) {
            norm_p += pu[i].u * pu[i].u + pu[i].v * pu[i].v;
            norm_t += tu[i].u * tu[i].u + tu[i].v * tu[i].v;
        }
        if (norm_p > 0.0 && norm_t > 0.0) report.values["vcc"][h] = circular::vcc(pu, tu);

        const auto pu_u = component_series(pu, true), pu_v = component_series(pu, false);
        const auto tu_u = component_series(tu, true), tu_v = component_series(tu, false);
        report.values["mae_u"][h] = mae(pu_u, tu_u);
        report.values["rmse_u"][h] = rmse(pu_u, tu_u);
        report.values["mae_v"][h] = mae(pu_v, tu_v);
        report.values["rmse_v"][h] = rmse(pu_v, tu_v);
        if (tu.size() >= 2) {
            auto variance = [](const std::vector<double>& x) {
                double m = 0.0;
                for (double v : x) m += v;
                m /= static_cast<double>(x.size());
                double var = 0.0;
                for (double v : x) var += (v - m) * (v - m);
                return var;
            };
            if (variance(tu_u) > 0.0 && variance(tu_v) > 0.0) {
                const auto [r2u, r2v] = circular::r2_components(pu, tu);
                report.values["r2_u"][h] = r2u;
                report.values["r2_v"][h] = r2v;
            }
        }
    }
    return report;
}

ForecastReport evaluate(const TrainedArtifact& artifact, const PreparedData& prepared,
                        data::Split split) {
    return evaluate_with(
        [&](std::size_t wi) { return forecast_window(artifact, prepared, wi); }, prepared,
        split, artifact.config.hr_delta);
}

}  // namespace wavehits::pipeline
