#include "wavehits/cli.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <sstream>

#include "wavehits/circular.hpp"
#include "wavehits/nhits.hpp"
#include "wavehits/pipeline.hpp"
#include "wavehits/util.hpp"
#include "wavehits/version.hpp"
#include "wavehits/wavelet.hpp"

namespace wavehits::cli {

namespace {

namespace fs = std::filesystem;

void say(const Options& opts, const std::string& line) {
    if (opts.verbosity >= 1) std::fprintf(stdout, "%s\n", line.c_str());
}

int fail(const std::string& message) {
    std::fprintf(stderr, "error: %s\n", message.c_str());
    return 1;
}

fs::path out_path(const Options& opts, const std::string& name) {
    fs::create_directories(opts.out_dir);
    return fs::path(opts.out_dir) / name;
}

pipeline::LogFn epoch_logger(const Options& opts) {
    if (opts.verbosity < 2) return {};
    return [](const std::string& line) { std::fprintf(stdout, "  %s\n", line.c_str()); };
}

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// selfcheck suites
// ---------------------------------------------------------------------------

struct SuiteResult {
    std::string name;
    double tolerance = 0.0;
    double observed = 0.0;
    bool pass = false;
};

SuiteResult suite_uv_roundtrip(double tol) {
    std::mt19937_64 rng(1097);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double speed = util::uniform_range(rng, 1e-6, 50.0);
        const double dir = util::uniform_range(rng, 0.0, 360.0);
        const auto back = circular::from_uv(circular::to_uv({speed, dir, false}));
        worst = std::max(worst, std::fabs(back.speed - speed));
        worst = std::max(worst, circular::angular_diff(back.direction, dir));
    }
    return {"uv-roundtrip", tol, worst, worst < tol};
}

SuiteResult suite_wavelet_reconstruction(double tol) {
    std::mt19937_64 rng(2203);
    double worst = 0.0;
    for (auto boundary : {wavelet::Boundary::periodic, wavelet::Boundary::symmetric}) {
        const auto spec = wavelet::WaveletSpec::db4(boundary);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 8 * (4 + rng() % 61);
            const int levels = 1 + static_cast<int>(rng() % 3);
            std::vector<double> x(n);
            for (auto& v : x) v = util::uniform_range(rng, -3.0, 3.0);
            const auto rec = wavelet::waverec(wavelet::wavedec(x, spec, levels), spec);
            for (std::size_t i = 0; i < n; ++i)
                worst = std::max(worst, std::fabs(rec[i] - x[i]));
        }
    }
    return {"wavelet-reconstruction", tol, worst, worst < tol};
}

SuiteResult suite_metric_oracle(double tol) {
    std::mt19937_64 rng(3301);
    auto oracle_diff = [](double a, double b) {
        double best = std::fabs(a - b);
        for (int k : {-1, 1}) best = std::min(best, std::fabs(a - b + 360.0 * k));
        return best;
    };
    double worst = 0.0;
    for (int series = 0; series < 1000; ++series) {
        const std::size_t n = 1 + rng() % 48;
        std::vector<double> pred(n), truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = util::uniform_range(rng, 0.0, 360.0);
            truth[i] = util::uniform_range(rng, 0.0, 360.0);
        }
        double mae = 0.0, mse = 0.0, hits = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = oracle_diff(pred[i], truth[i]);
            mae += d;
            mse += d * d;
            if (d <= 15.0) hits += 1.0;
        }
        const double dn = static_cast<double>(n);
        worst = std::max(worst, std::fabs(circular::mae_periodic(pred, truth) - mae / dn));
        worst = std::max(worst,
                         std::fabs(circular::rmse_periodic(pred, truth) - std::sqrt(mse / dn)));
        worst = std::max(worst, std::fabs(circular::hit_rate(pred, truth, 15.0) - hits / dn));
    }
    return {"metric-oracle", tol, worst, worst < tol};
}

SuiteResult suite_gradient_check(double tol) {
    nhits::ModelSpec spec;
    spec.input_channels = 4;
    spec.input_length = 32;
    spec.horizon = 6;
    spec.target_channels = {0, 1};
    spec.pool_kernels = {2, 1};
    spec.hidden_widths = {16};
    spec.backcast_knots = {4, 8};
    spec.forecast_knots = {2, 3};
    auto model = nhits::make_model(spec, 515253);

    std::mt19937_64 rng(515253);
    nn::Tensor2 input(4, 32);
    for (auto& v : input.data) v = util::uniform_range(rng, 0.1, 2.0);
    nn::Tensor2 target(2, 6);
    for (auto& v : target.data) v = util::uniform_range(rng, -1.0, 1.0);

    auto params = model.parameters();
    auto loss = [&]() {
        const auto out = nhits::model_forward(model, input);
        double acc = 0.0;
        for (std::size_t i = 0; i < out.forecast.data.size(); ++i) {
            const double d = out.forecast.data[i] - target.data[i];
            acc += d * d;
        }
        return acc / static_cast<double>(out.forecast.data.size());
    };
    auto analytic = [&]() {
        nhits::ModelCache cache;
        const auto out = nhits::model_forward(model, input, &cache);
        nn::Tensor2 fgrad(2, 6);
        for (std::size_t i = 0; i < fgrad.data.size(); ++i)
            fgrad.data[i] = 2.0 * (out.forecast.data[i] - target.data[i]) /
                            static_cast<double>(fgrad.data.size());
        auto grads = nn::zero_grads_like(params);
        nhits::model_backward(model, cache, fgrad, grads);
        return grads;
    };
    const auto report = nn::grad_check(loss, analytic, params, tol);
    return {"gradient-check", tol, report.max_discrepancy, report.pass};
}

// ---------------------------------------------------------------------------

struct AblateRun {
    config::Variant variant;
    pipeline::ForecastReport report;
};

void write_ablate_tables(const Options& opts, const std::string& header,
                         const std::vector<AblateRun>& runs, std::size_t horizon) {
    if (runs.empty()) return;
    const auto& metric_names = runs.front().report.metric_names;
    for (const auto& metric : metric_names) {
        std::ostringstream os;
        os << header;
        os << "step";
        for (const auto& run : runs) os << ',' << config::variant_name(run.variant);
        os << "\n";
        for (std::size_t h = 0; h < horizon; ++h) {
            os << (h + 1);
            for (const auto& run : runs) {
                char buf[48];
                std::snprintf(buf, sizeof(buf), ",%.6f", run.report.at(metric)[h]);
                os << buf;
            }
            os << "\n";
        }
        pipeline::write_text_file(out_path(opts, "ablate_" + metric + ".csv").string(),
                                  os.str());
    }
}

}  // namespace

config::ExperimentConfig resolve_config(const Options& opts) {
    config::ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = config::load_config(opts.config_path);
    config::apply_overrides(cfg, opts.overrides);
    if (opts.seed) cfg.seed = *opts.seed;
    config::validate(cfg);
    return cfg;
}

int run_ingest(const Options& opts) {
    try {
        const auto cfg = resolve_config(opts);
        if (cfg.source != "csv")
            return fail("ingest needs data.source = csv (got '" + cfg.source + "')");
        auto parsed = data::parse_csv(cfg.csv_path, cfg.schema);
        data::CleanReport clean_report;
        const auto frame = data::clean_and_grid(parsed.records, &clean_report);
        const std::string header = pipeline::provenance_header(cfg, frame);

        data::write_frame_csv(frame, cfg.schema, out_path(opts, "ingested.csv").string(),
                              header);
        std::ostringstream report;
        report << header << "\n"
               << "== parse ==\n"
               << parsed.report.summary() << "\n== cleaning ==\n"
               << clean_report.summary();
        pipeline::write_text_file(out_path(opts, "ingest_report.txt").string(), report.str());
        say(opts, "ingested " + std::to_string(frame.rows()) + " rows, " +
                      std::to_string(parsed.report.total_warnings()) + " warnings -> " +
                      out_path(opts, "ingested.csv").string());
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

int run_synth(const Options& opts) {
    try {
        const auto cfg = resolve_config(opts);
        const auto frame = data::synth_wind(cfg.synth);
        const std::string header = pipeline::provenance_header(cfg, frame);
        data::write_frame_csv(frame, cfg.schema, out_path(opts, "synth.csv").string(), header);
        say(opts, "wrote " + std::to_string(frame.rows()) + " synthetic rows (" +
                      std::to_string(data::count_north_crossings(frame.dir2)) +
                      " north crossings) -> " + out_path(opts, "synth.csv").string());
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

int run_train(const Options& opts) {
    try {
        const auto cfg = resolve_config(opts);
        const auto prepared = pipeline::prepare(cfg, pipeline::load_frame(cfg));
        say(opts, "training " + config::variant_name(cfg.variant) + " on " +
                      std::to_string(prepared.plan.split_counts[0]) + " windows");
        const auto artifact = pipeline::train(cfg, prepared, epoch_logger(opts));
        pipeline::save_artifact(artifact, out_path(opts, "model.whts").string());
        const std::string header = pipeline::provenance_header(cfg, prepared.frame);
        pipeline::write_text_file(out_path(opts, "history.csv").string(),
                                  pipeline::history_csv(artifact.history, header));
        if (!artifact.history.val_loss.empty())
            say(opts, "best epoch " + std::to_string(artifact.history.best_epoch) +
                          ", val loss " +
                          std::to_string(
                              artifact.history.val_loss[artifact.history.best_epoch]));
        say(opts, "model -> " + out_path(opts, "model.whts").string());
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

namespace {

int with_artifact(const Options& opts,
                  const std::function<int(const config::ExperimentConfig&,
                                          const pipeline::TrainedArtifact&,
                                          const pipeline::PreparedData&)>& body) {
    const auto cfg = resolve_config(opts);
    const auto model_path = out_path(opts, "model.whts");
    if (!fs::exists(model_path))
        return fail("missing prerequisite artifact '" + model_path.string() +
                    "' (run the train subcommand first)");
    const auto artifact = pipeline::load_artifact(model_path.string());
    if (config::digest(artifact.config) != config::digest(cfg))
        return fail("config/artifact mismatch: the artifact was trained with a different "
                    "configuration (digest " +
                    util::hex64(config::digest(artifact.config)) + " vs " +
                    util::hex64(config::digest(cfg)) + ")");
    const auto prepared = pipeline::prepare(cfg, pipeline::load_frame(cfg));
    if (prepared.data_fingerprint != artifact.data_fingerprint)
        return fail("config/artifact mismatch: the data fingerprint changed since training");
    return body(cfg, artifact, prepared);
}

}  // namespace

int run_evaluate(const Options& opts) {
    try {
        return with_artifact(opts, [&](const config::ExperimentConfig& cfg,
                                       const pipeline::TrainedArtifact& artifact,
                                       const pipeline::PreparedData& prepared) {
            const auto report = pipeline::evaluate(artifact, prepared, data::Split::test);
            const std::string header = pipeline::provenance_header(cfg, prepared.frame);
            pipeline::write_text_file(out_path(opts, "report.csv").string(),
                                      pipeline::report_csv(report, header));
            pipeline::write_text_file(
                out_path(opts, "report.txt").string(),
                header + pipeline::report_table(
                             report, "test metrics (" + config::variant_name(cfg.variant) +
                                         ", hr delta " + std::to_string(cfg.hr_delta) + ")"));
            say(opts, "mean MAE_periodic " +
                          std::to_string(mean_of(report.at("mae_periodic"))) + " deg -> " +
                          out_path(opts, "report.csv").string());
            return 0;
        });
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

int run_forecast(const Options& opts) {
    try {
        return with_artifact(opts, [&](const config::ExperimentConfig& cfg,
                                       const pipeline::TrainedArtifact& artifact,
                                       const pipeline::PreparedData& prepared) {
            std::ostringstream os;
            os << pipeline::provenance_header(cfg, prepared.frame);
            os << "window,start_time,step,direction,speed,calm\n";
            for (std::size_t wi = 0; wi < prepared.windows.size(); ++wi) {
                if (prepared.windows[wi].split != data::Split::test) continue;
                const auto forecast = pipeline::forecast_window(artifact, prepared, wi);
                const auto start =
                    prepared.frame.timestamps[prepared.windows[wi].start_row];
                for (std::size_t h = 0; h < cfg.horizon; ++h) {
                    char buf[160];
                    std::snprintf(buf, sizeof(buf), "%zu,%s,%zu,%.6f,%.6f,%d\n", wi,
                                  data::epoch_to_iso(start).c_str(), h + 1,
                                  forecast.direction[h], forecast.speed[h],
                                  forecast.calm[h] ? 1 : 0);
                    os << buf;
                }
            }
            pipeline::write_text_file(out_path(opts, "forecasts.csv").string(), os.str());
            say(opts, "forecasts -> " + out_path(opts, "forecasts.csv").string());
            return 0;
        });
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

int run_ablate(const Options& opts) {
    std::vector<AblateRun> runs;
    std::string header;
    std::size_t horizon = 0;
    try {
        const auto base_cfg = resolve_config(opts);
        const auto frame = pipeline::load_frame(base_cfg);
        horizon = base_cfg.horizon;

        const config::Variant variants[] = {
            config::Variant::wavehits, config::Variant::nhits_uv,
            config::Variant::nhits_direct, config::Variant::persistence};
        for (const auto variant : variants) {
            config::ExperimentConfig cfg = base_cfg;
            cfg.variant = variant;
            say(opts, "[ablate] " + config::variant_name(variant));
            const auto prepared = pipeline::prepare(cfg, frame);
            if (header.empty()) header = pipeline::provenance_header(base_cfg, prepared.frame);
            const auto artifact = pipeline::train(cfg, prepared, epoch_logger(opts));
            runs.push_back({variant, pipeline::evaluate(artifact, prepared, data::Split::test)});
        }
    } catch (const std::exception& e) {
        write_ablate_tables(opts, header, runs, horizon);  // keep partial results
        return fail(std::string(e.what()) + " (partial ablation tables preserved)");
    }

    write_ablate_tables(opts, header, runs, horizon);

    std::map<config::Variant, double> mean_mae;
    for (const auto& run : runs)
        mean_mae[run.variant] = mean_of(run.report.at("mae_periodic"));

    const double wavehits_mae = mean_mae[config::Variant::wavehits];
    const double uv_mae = mean_mae[config::Variant::nhits_uv];
    const double direct_mae = mean_mae[config::Variant::nhits_direct];
    const bool uv_beats_direct = uv_mae < direct_mae;
    const bool wavehits_in_band = wavehits_mae <= 1.05 * uv_mae;
    const bool ordering_pass = uv_beats_direct && wavehits_in_band;

    std::ostringstream os;
    os << header << "mean MAE_periodic over steps 1.." << horizon << ":\n";
    for (const auto& run : runs) {
        char buf[80];
        std::snprintf(buf, sizeof(buf), "  %-14s %10.4f deg\n",
                      config::variant_name(run.variant).c_str(), mean_mae[run.variant]);
        os << buf;
    }
    os << "ordering check (nhits_uv < nhits_direct): "
       << (uv_beats_direct ? "PASS" : "FAIL") << "\n";
    os << "ordering check (wavehits <= 1.05 * nhits_uv): "
       << (wavehits_in_band ? "PASS" : "FAIL") << "\n";
    os << "persistence bar (variant beats persistence at every step):\n";
    for (const auto& run : runs) {
        if (run.variant == config::Variant::persistence) continue;
        bool beats = true;
        const auto& persistence_report = runs.back().report;
        for (std::size_t h = 0; h < horizon; ++h)
            beats &= run.report.at("mae_periodic")[h] <
                     persistence_report.at("mae_periodic")[h];
        os << "  " << config::variant_name(run.variant) << ": " << (beats ? "yes" : "no")
           << "\n";
    }
    pipeline::write_text_file(out_path(opts, "ablate_summary.txt").string(), os.str());
    say(opts, os.str());
    return ordering_pass ? 0 : 1;
}

int run_selfcheck(const Options& opts) {
    try {
        const auto cfg = resolve_config(opts);
        const SuiteResult suites[] = {
            suite_wavelet_reconstruction(cfg.selfcheck_wavelet_tol),
            suite_uv_roundtrip(cfg.selfcheck_roundtrip_tol),
            suite_metric_oracle(cfg.selfcheck_metric_tol),
            suite_gradient_check(cfg.selfcheck_grad_tol),
        };
        bool all_pass = true;
        std::printf("wavehits %s selfcheck\n", kVersion);
        for (const auto& suite : suites) {
            std::printf("  %-24s tolerance %-10.3g observed %-12.4g %s\n", suite.name.c_str(),
                        suite.tolerance, suite.observed, suite.pass ? "PASS" : "FAIL");
            all_pass &= suite.pass;
        }
        std::printf("selfcheck: %s\n", all_pass ? "all suites passed" : "FAILURES above");
        return all_pass ? 0 : 1;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

}  // namespace wavehits::cli
