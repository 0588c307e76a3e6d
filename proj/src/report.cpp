#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wavehits/pipeline.hpp"
#include "wavehits/util.hpp"
#include "wavehits/version.hpp"

namespace wavehits::pipeline {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string provenance_header(const config::ExperimentConfig& cfg,
                              const data::FrameSet& frame) {
    std::ostringstream os;
    os << "# wavehits " << kVersion << "\n";
    os << "# config: " << util::hex64(config::digest(cfg)) << "\n";
    os << "# seed: " << cfg.seed << "\n";
    os << "# data: " << util::hex64(frame.fingerprint()) << " span "
       << data::epoch_to_iso(frame.timestamps.front()) << " .. "
       << data::epoch_to_iso(frame.timestamps.back()) << "\n";
    return os.str();
}

std::string report_csv(const ForecastReport& report, const std::string& header) {
    std::ostringstream os;
    os << header;
    os << "metric";
    for (std::size_t h = 1; h <= report.horizon; ++h) os << ",step" << h;
    os << "\n";
    for (const auto& name : report.metric_names) {
        os << name;
        for (double v : report.at(name)) os << ',' << num(v);
        os << "\n";
    }
    os << "samples";
    for (std::size_t n : report.samples_per_step) os << ',' << n;
    os << "\n";
    os << "calm_excluded";
    for (std::size_t n : report.calm_excluded_per_step) os << ',' << n;
    os << "\n";
    return os.str();
}

std::string report_table(const ForecastReport& report, const std::string& title) {
    std::ostringstream os;
    os << title << "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-16s", "metric");
    os << buf;
    for (std::size_t h = 1; h <= report.horizon; ++h) {
        std::snprintf(buf, sizeof(buf), "    step%-2zu", h);
        os << buf;
    }
    os << "\n";
    for (const auto& name : report.metric_names) {
        std::snprintf(buf, sizeof(buf), "%-16s", name.c_str());
        os << buf;
        for (double v : report.at(name)) {
            std::snprintf(buf, sizeof(buf), "%10.3f", v);
            os << buf;
        }
        os << "\n";
    }
    std::snprintf(buf, sizeof(buf), "%-16s", "samples");
    os << buf;
    for (std::size_t n : report.samples_per_step) {
        std::snprintf(buf, sizeof(buf), "%10zu", n);
        os << buf;
    }
    os << "\n";
    std::snprintf(buf, sizeof(buf), "%-16s", "calm_excluded");
    os << buf;
    for (std::size_t n : report.calm_excluded_per_step) {
        std::snprintf(buf, sizeof(buf), "%10zu", n);
        os << buf;
    }
    os << "\n";
    return os.str();
}

std::string history_csv(const TrainHistory& history, const std::string& header) {
    std::ostringstream os;
    os << header;
    os << "epoch,train_loss,val_loss,best\n";
    for (std::size_t e = 0; e < history.train_loss.size(); ++e) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%d\n", e, history.train_loss[e],
                      history.val_loss[e], e == history.best_epoch ? 1 : 0);
        os << buf;
    }
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write failure on '" + path + "'");
}

}  // namespace wavehits::pipeline
