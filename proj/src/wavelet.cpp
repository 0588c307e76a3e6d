#include "wavehits/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace wavehits::wavelet {

namespace {

using cplx = std::complex<double>;

constexpr std::size_t kTaps = WaveletSpec::filter_length;

// Roots of a monic cubic via Durand-Kerner; deterministic and accurate to
// machine precision for the well-conditioned polynomial used here.
std::array<cplx, 3> monic_cubic_roots(double c2, double c1, double c0) {
    auto eval = [&](cplx y) { return ((y + c2) * y + c1) * y + c0; };
    std::array<cplx, 3> r{cplx(0.4, 0.9), cplx(0.4, 0.9) * cplx(0.4, 0.9),
                          cplx(0.4, 0.9) * cplx(0.4, 0.9) * cplx(0.4, 0.9)};
    for (int it = 0; it < 200; ++it) {
        double moved = 0.0;
        for (int i = 0; i < 3; ++i) {
            cplx denom(1.0, 0.0);
            for (int j = 0; j < 3; ++j)
                if (j != i) denom *= r[i] - r[j];
            const cplx step = eval(r[i]) / denom;
            r[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-16) break;
    }
    return r;
}

std::vector<cplx> poly_mul(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    std::vector<cplx> out(a.size() + b.size() - 1, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

// Daubechies lowpass taps for four vanishing moments, from the standard
// spectral factorization: factor |L|^2 = P(y) with
// P(y) = sum_k C(3+k,k) y^k, keep the z-roots inside the unit circle, and
// multiply by ((1+z)/2)^4.
std::array<double, kTaps> derive_db4_lowpass() {
    // P(y) = 1 + 4y + 10y^2 + 20y^3, made monic.
    const auto y_roots = monic_cubic_roots(10.0 / 20.0, 4.0 / 20.0, 1.0 / 20.0);

    std::vector<cplx> factor{cplx(1.0, 0.0)};  // running polynomial in z
    cplx norm(1.0, 0.0);
    for (const cplx& y : y_roots) {
        // y = (2 - z - 1/z)/4  =>  z^2 - (2 - 4y) z + 1 = 0
        const cplx c = 2.0 - 4.0 * y;
        const cplx disc = std::sqrt(c * c * 0.25 - 1.0);
        cplx z = c * 0.5 + disc;
        if (std::abs(z) > 1.0) z = c * 0.5 - disc;  // roots come in reciprocal pairs
        factor = poly_mul(factor, {-z, cplx(1.0, 0.0)});
        norm *= cplx(1.0, 0.0) - z;
    }
    for (auto& f : factor) f /= norm;  // L(1) = 1

    // ((1+z)/2)^4 carries the four vanishing moments.
    const std::vector<cplx> binom{cplx(1.0 / 16, 0), cplx(4.0 / 16, 0), cplx(6.0 / 16, 0),
                                  cplx(4.0 / 16, 0), cplx(1.0 / 16, 0)};
    const auto m0 = poly_mul(binom, factor);
    if (m0.size() != kTaps)
        throw std::runtime_error("db4 factorization produced a wrong-degree polynomial");

    std::array<double, kTaps> h{};
    const double root2 = std::sqrt(2.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < kTaps; ++i) {
        if (std::abs(m0[i].imag()) > 1e-12)
            throw std::runtime_error("db4 factorization left a complex residue");
        h[i] = m0[i].real() * root2;
        sum += h[i];
    }
    // Pin the DC gain exactly; the factorization already lands within 1e-15.
    for (auto& v : h) v *= root2 / sum;
    return h;
}

void validate_filter_bank(const WaveletSpec& spec) {
    const double tol = 1e-12;
    double sum_lo = 0.0, sum_hi = 0.0, energy = 0.0;
    for (std::size_t i = 0; i < kTaps; ++i) {
        sum_lo += spec.lowpass[i];
        sum_hi += spec.highpass[i];
        energy += spec.lowpass[i] * spec.lowpass[i];
    }
    if (std::fabs(sum_lo - std::sqrt(2.0)) > tol)
        throw std::runtime_error("wavelet filter: lowpass sum != sqrt(2)");
    if (std::fabs(sum_hi) > tol)
        throw std::runtime_error("wavelet filter: highpass sum != 0");
    if (std::fabs(energy - 1.0) > tol)
        throw std::runtime_error("wavelet filter: lowpass energy != 1");
    for (std::size_t k = 1; 2 * k < kTaps; ++k) {
        double dot = 0.0;
        for (std::size_t n = 0; n + 2 * k < kTaps; ++n)
            dot += spec.lowpass[n] * spec.lowpass[n + 2 * k];
        if (std::fabs(dot) > tol)
            throw std::runtime_error("wavelet filter: even-shift orthogonality violated");
    }
}

// Symmetric (half-sample) extension lookup: position p in the bi-infinite
// extension of x. Valid for |overhang| <= n, which the length preconditions
// guarantee.
inline double reflect_at(std::span<const double> x, long p) {
    const long n = static_cast<long>(x.size());
    if (p < 0) p = -1 - p;
    if (p >= n) p = 2 * n - 1 - p;
    return x[static_cast<std::size_t>(p)];
}

void check_coeff_pair(std::span<const double> approx, std::span<const double> detail) {
    if (approx.size() != detail.size() || approx.empty())
        throw std::invalid_argument("idwt_step: approx/detail lengths inconsistent");
}

}  // namespace

WaveletSpec WaveletSpec::db4(Boundary boundary) {
    WaveletSpec spec;
    spec.name = "db4";
    spec.boundary = boundary;
    spec.lowpass = derive_db4_lowpass();
    for (std::size_t n = 0; n < kTaps; ++n) {
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        spec.highpass[n] = sign * spec.lowpass[kTaps - 1 - n];
    }
    validate_filter_bank(spec);
    return spec;
}

std::size_t analysis_length(std::size_t n, Boundary boundary) {
    if (boundary == Boundary::periodic) return n / 2;
    return (n + kTaps - 1) / 2;
}

int max_levels(std::size_t n, Boundary boundary) {
    int levels = 0;
    while (true) {
        if (boundary == Boundary::periodic) {
            if (n < 2 || n % 2 != 0) break;
        } else {
            if (n < kTaps) break;
        }
        n = analysis_length(n, boundary);
        ++levels;
        if (levels > 64) break;
    }
    return levels;
}

std::pair<std::vector<double>, std::vector<double>>
dwt_step(std::span<const double> signal, const WaveletSpec& spec) {
    const std::size_t n = signal.size();
    if (spec.boundary == Boundary::periodic) {
        if (n < 2 || n % 2 != 0)
            throw std::invalid_argument(
                "dwt_step: periodic mode requires an even signal length >= 2, got " +
                std::to_string(n));
        const std::size_t half = n / 2;
        std::vector<double> approx(half, 0.0), detail(half, 0.0);
        for (std::size_t k = 0; k < half; ++k) {
            double a = 0.0, d = 0.0;
            for (std::size_t j = 0; j < kTaps; ++j) {
                const double v = signal[(2 * k + j) % n];
                a += spec.lowpass[j] * v;
                d += spec.highpass[j] * v;
            }
            approx[k] = a;
            detail[k] = d;
        }
        return {std::move(approx), std::move(detail)};
    }

    if (n < kTaps)
        throw std::invalid_argument("dwt_step: symmetric mode requires at least " +
                                    std::to_string(kTaps) + " samples, got " +
                                    std::to_string(n));
    const std::size_t out = analysis_length(n, Boundary::symmetric);
    std::vector<double> approx(out, 0.0), detail(out, 0.0);
    for (std::size_t k = 0; k < out; ++k) {
        // Windows sit at odd offsets of the extended signal so every tap
        // overlapping the interior is retained.
        const long base = 2 * static_cast<long>(k) - static_cast<long>(kTaps) + 2;
        double a = 0.0, d = 0.0;
        for (std::size_t j = 0; j < kTaps; ++j) {
            const double v = reflect_at(signal, base + static_cast<long>(j));
            a += spec.lowpass[j] * v;
            d += spec.highpass[j] * v;
        }
        approx[k] = a;
        detail[k] = d;
    }
    return {std::move(approx), std::move(detail)};
}

std::vector<double> idwt_step(std::span<const double> approx,
                              std::span<const double> detail,
                              const WaveletSpec& spec, std::size_t target_length) {
    check_coeff_pair(approx, detail);
    const std::size_t n_c = approx.size();
    if (analysis_length(target_length, spec.boundary) != n_c)
        throw std::invalid_argument("idwt_step: coefficient count does not match target length");

    std::vector<double> out(target_length, 0.0);
    if (spec.boundary == Boundary::periodic) {
        for (std::size_t k = 0; k < n_c; ++k) {
            for (std::size_t j = 0; j < kTaps; ++j) {
                const std::size_t m = (2 * k + j) % target_length;
                out[m] += approx[k] * spec.lowpass[j] + detail[k] * spec.highpass[j];
            }
        }
        return out;
    }

    for (std::size_t k = 0; k < n_c; ++k) {
        const long base = 2 * static_cast<long>(k) - static_cast<long>(kTaps) + 2;
        for (std::size_t j = 0; j < kTaps; ++j) {
            const long m = base + static_cast<long>(j);
            if (m < 0 || m >= static_cast<long>(target_length)) continue;
            out[static_cast<std::size_t>(m)] +=
                approx[k] * spec.lowpass[j] + detail[k] * spec.highpass[j];
        }
    }
    return out;
}

WaveletCoeffs wavedec(std::span<const double> signal, const WaveletSpec& spec,
                      int levels) {
    if (levels < 1) throw std::invalid_argument("wavedec: levels must be >= 1");
    const int feasible = max_levels(signal.size(), spec.boundary);
    if (levels > feasible)
        throw std::invalid_argument("wavedec: " + std::to_string(levels) +
                                    " levels infeasible for length " +
                                    std::to_string(signal.size()) +
                                    " (maximum feasible J = " + std::to_string(feasible) + ")");
    WaveletCoeffs coeffs;
    coeffs.original_length = signal.size();
    coeffs.levels = levels;
    std::vector<double> current(signal.begin(), signal.end());
    for (int j = 0; j < levels; ++j) {
        auto [approx, detail] = dwt_step(current, spec);
        coeffs.details.push_back(std::move(detail));
        current = std::move(approx);
    }
    coeffs.approx = std::move(current);
    return coeffs;
}

std::vector<double> waverec(const WaveletCoeffs& coeffs, const WaveletSpec& spec) {
    if (coeffs.levels < 1 || coeffs.details.size() != static_cast<std::size_t>(coeffs.levels))
        throw std::invalid_argument("waverec: level count inconsistent with detail list");

    // Recompute the analysis length chain and check the stored pyramid.
    std::vector<std::size_t> lengths(static_cast<std::size_t>(coeffs.levels) + 1);
    lengths[0] = coeffs.original_length;
    for (int j = 1; j <= coeffs.levels; ++j)
        lengths[static_cast<std::size_t>(j)] =
            analysis_length(lengths[static_cast<std::size_t>(j) - 1], spec.boundary);
    if (coeffs.approx.size() != lengths.back())
        throw std::invalid_argument("waverec: approximation length inconsistent");
    for (int j = 1; j <= coeffs.levels; ++j)
        if (coeffs.details[static_cast<std::size_t>(j) - 1].size() !=
            lengths[static_cast<std::size_t>(j)])
            throw std::invalid_argument("waverec: detail length inconsistent at level " +
                                        std::to_string(j));

    std::vector<double> current = coeffs.approx;
    for (int j = coeffs.levels; j >= 1; --j) {
        current = idwt_step(current, coeffs.details[static_cast<std::size_t>(j) - 1], spec,
                            lengths[static_cast<std::size_t>(j) - 1]);
    }
    return current;
}

WaveletCoeffs denoise_lowpass(WaveletCoeffs coeffs, int keep_detail_levels) {
    if (keep_detail_levels < 0 || keep_detail_levels > coeffs.levels)
        throw std::invalid_argument("denoise_lowpass: keep_detail_levels outside [0, levels]");
    const int zero_below = coeffs.levels - keep_detail_levels;  // finest levels to drop
    for (int j = 0; j < zero_below; ++j)
        std::fill(coeffs.details[static_cast<std::size_t>(j)].begin(),
                  coeffs.details[static_cast<std::size_t>(j)].end(), 0.0);
    return coeffs;
}

std::vector<std::vector<double>> feature_channels(const WaveletCoeffs& coeffs,
                                                  const WaveletSpec& spec) {
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(coeffs.levels) + 1);

    WaveletCoeffs only_approx = coeffs;
    for (auto& d : only_approx.details) std::fill(d.begin(), d.end(), 0.0);
    rows.push_back(waverec(only_approx, spec));

    for (int j = 1; j <= coeffs.levels; ++j) {
        WaveletCoeffs only_detail = coeffs;
        std::fill(only_detail.approx.begin(), only_detail.approx.end(), 0.0);
        for (int k = 1; k <= coeffs.levels; ++k)
            if (k != j)
                std::fill(only_detail.details[static_cast<std::size_t>(k) - 1].begin(),
                          only_detail.details[static_cast<std::size_t>(k) - 1].end(), 0.0);
        rows.push_back(waverec(only_detail, spec));
    }
    return rows;
}

std::vector<std::vector<double>> feature_channels(std::span<const double> signal,
                                                  const WaveletSpec& spec,
                                                  int levels) {
    return feature_channels(wavedec(signal, spec, levels), spec);
}

}  // namespace wavehits::wavelet
