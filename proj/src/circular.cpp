#include "wavehits/circular.hpp"

#include <cmath>
#include <stdexcept>

namespace wavehits::circular {

namespace {

constexpr double kDegToRad = M_PI / 180.0;
constexpr double kRadToDeg = 180.0 / M_PI;

void require_same_nonempty(std::size_t a, std::size_t b, const char* what) {
    if (a == 0 || b == 0)
        throw std::invalid_argument(std::string(what) + ": empty input series");
    if (a != b)
        throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}  // namespace

double wrap_degrees(double degrees) {
    double d = std::fmod(degrees, 360.0);
    if (d < 0.0) d += 360.0;
    if (d >= 360.0) d = 0.0;  // fmod can land exactly on 360 after the shift
    return d;
}

UVPair to_uv(const WindSample& sample) {
    if (sample.speed < 0.0)
        throw std::invalid_argument("to_uv: negative wind speed");
    if (sample.direction < 0.0 || sample.direction >= 360.0)
        throw std::invalid_argument("to_uv: direction outside [0, 360)");
    const double rad = sample.direction * kDegToRad;
    return {-sample.speed * std::sin(rad), -sample.speed * std::cos(rad)};
}

WindSample from_uv(const UVPair& uv) {
    if (uv.u == 0.0 && uv.v == 0.0) {
        return {0.0, 0.0, true};
    }
    WindSample out;
    out.speed = std::hypot(uv.u, uv.v);
    // atan2(u, v) alone gives the TO-direction; negating both arguments
    // restores the FROM-convention fixed by to_uv, so the round trip holds.
    out.direction = wrap_degrees(std::atan2(-uv.u, -uv.v) * kRadToDeg);
    out.calm = false;
    return out;
}

double angular_diff(double a_deg, double b_deg) {
    const double d = std::fabs(a_deg - b_deg);
    return std::min(d, 360.0 - d);
}

double circular_mean(std::span<const double> directions_deg) {
    if (directions_deg.empty())
        throw std::invalid_argument("circular_mean: empty input");
    double s = 0.0, c = 0.0;
    for (double d : directions_deg) {
        s += std::sin(d * kDegToRad);
        c += std::cos(d * kDegToRad);
    }
    if (s == 0.0 && c == 0.0) return 0.0;
    return wrap_degrees(std::atan2(s, c) * kRadToDeg);
}

double mae_periodic(std::span<const double> pred, std::span<const double> truth) {
    require_same_nonempty(pred.size(), truth.size(), "mae_periodic");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += angular_diff(pred[i], truth[i]);
    return acc / static_cast<double>(pred.size());
}

double rmse_periodic(std::span<const double> pred, std::span<const double> truth) {
    require_same_nonempty(pred.size(), truth.size(), "rmse_periodic");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = angular_diff(pred[i], truth[i]);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

double rmae_periodic(std::span<const double> pred, std::span<const double> truth) {
    require_same_nonempty(pred.size(), truth.size(), "rmae_periodic");
    double mean_true = 0.0;
    for (double t : truth) mean_true += t;
    mean_true /= static_cast<double>(truth.size());
    if (mean_true <= 0.0)
        throw std::invalid_argument("rmae_periodic: arithmetic mean of true series must be > 0");
    return mae_periodic(pred, truth) / mean_true;
}

double vcc(std::span<const UVPair> pred, std::span<const UVPair> truth) {
    require_same_nonempty(pred.size(), truth.size(), "vcc");
    double dot = 0.0, np = 0.0, nt = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        dot += pred[i].u * truth[i].u + pred[i].v * truth[i].v;
        np += pred[i].u * pred[i].u + pred[i].v * pred[i].v;
        nt += truth[i].u * truth[i].u + truth[i].v * truth[i].v;
    }
    if (np == 0.0 || nt == 0.0)
        throw std::invalid_argument("vcc: one side is all-zero vectors (undefined denominator)");
    return dot / (std::sqrt(np) * std::sqrt(nt));
}

double hit_rate(std::span<const double> pred, std::span<const double> truth,
                double delta_deg) {
    require_same_nonempty(pred.size(), truth.size(), "hit_rate");
    if (delta_deg < 0.0)
        throw std::invalid_argument("hit_rate: delta must be >= 0");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (angular_diff(pred[i], truth[i]) <= delta_deg) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

std::pair<double, double> r2_components(std::span<const UVPair> pred,
                                        std::span<const UVPair> truth) {
    require_same_nonempty(pred.size(), truth.size(), "r2_components");
    if (pred.size() < 2)
        throw std::invalid_argument("r2_components: need at least 2 samples");
    const double n = static_cast<double>(truth.size());
    double mu = 0.0, mv = 0.0;
    for (const auto& t : truth) {
        mu += t.u;
        mv += t.v;
    }
    mu /= n;
    mv /= n;
    double res_u = 0.0, res_v = 0.0, tot_u = 0.0, tot_v = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double du = pred[i].u - truth[i].u;
        const double dv = pred[i].v - truth[i].v;
        res_u += du * du;
        res_v += dv * dv;
        tot_u += (truth[i].u - mu) * (truth[i].u - mu);
        tot_v += (truth[i].v - mv) * (truth[i].v - mv);
    }
    if (tot_u == 0.0 || tot_v == 0.0)
        throw std::invalid_argument("r2_components: zero variance in a true component");
    return {1.0 - res_u / tot_u, 1.0 - res_v / tot_v};
}

double r2_direction(std::span<const double> pred, std::span<const double> truth) {
    require_same_nonempty(pred.size(), truth.size(), "r2_direction");
    const double mean_dir = circular_mean(truth);
    double res = 0.0, tot = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = angular_diff(pred[i], truth[i]);
        const double s = angular_diff(truth[i], mean_dir);
        res += d * d;
        tot += s * s;
    }
    if (tot == 0.0)
        throw std::invalid_argument("r2_direction: true series has zero angular spread");
    return 1.0 - res / tot;
}

}  // namespace wavehits::circular
