#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wavehits::wavelet {

/// Signal extension at the boundaries of a finite signal.
enum class Boundary {
    periodic,   ///< circular wraparound; orthonormal (energy-preserving) for even lengths
    symmetric,  ///< half-sample mirror reflection; no wraparound artifacts
};

/**
 * @brief An orthonormal two-channel analysis filter bank.
 *
 * Holds the 8-tap db4 decomposition pair: a lowpass scaling filter and its
 * quadrature-mirror highpass. The taps are computed from the Daubechies
 * spectral factorization at construction and validated against the
 * orthonormality invariants (sum, energy, even-shift orthogonality); the
 * constructor throws if any of them fails at 1e-12.
 */
struct WaveletSpec {
    std::string name;
    std::array<double, 8> lowpass{};
    std::array<double, 8> highpass{};
    Boundary boundary = Boundary::symmetric;

    static constexpr std::size_t filter_length = 8;

    /// Builds the 8-tap Daubechies wavelet with four vanishing moments.
    static WaveletSpec db4(Boundary boundary = Boundary::symmetric);
};

/**
 * @brief A multi-level coefficient pyramid.
 *
 * details[0] is the finest level (level 1); details.back() sits next to the
 * approximation at the coarsest level.
 */
struct WaveletCoeffs {
    std::vector<double> approx;
    std::vector<std::vector<double>> details;
    std::size_t original_length = 0;
    int levels = 0;
};

/// Number of analysis coefficients produced from a signal of length n.
std::size_t analysis_length(std::size_t n, Boundary boundary);

/// Largest decomposition depth feasible for a signal of length n.
int max_levels(std::size_t n, Boundary boundary);

/// Single-scale analysis: (approximation, detail), each of
/// analysis_length(n) samples. Periodic mode needs an even length >= 2;
/// symmetric mode needs length >= 8.
std::pair<std::vector<double>, std::vector<double>>
dwt_step(std::span<const double> signal, const WaveletSpec& spec);

/// Single-scale synthesis back to target_length samples. Exact inverse of
/// dwt_step for both boundary modes.
std::vector<double> idwt_step(std::span<const double> approx,
                              std::span<const double> detail,
                              const WaveletSpec& spec, std::size_t target_length);

/// Cascaded analysis to the given depth. Throws (naming the maximum feasible
/// depth) when levels exceeds what the signal length supports.
WaveletCoeffs wavedec(std::span<const double> signal, const WaveletSpec& spec,
                      int levels);

/// Full reconstruction; waverec(wavedec(x)) == x to machine precision.
std::vector<double> waverec(const WaveletCoeffs& coeffs, const WaveletSpec& spec);

/// Zeroes the detail levels finer than (levels - keep_detail_levels);
/// keep_detail_levels == levels is the identity, 0 keeps only the
/// approximation path.
WaveletCoeffs denoise_lowpass(WaveletCoeffs coeffs, int keep_detail_levels);

/// Additive multiresolution split: row 0 reconstructs from the approximation
/// alone, row j (1..levels) from detail level j alone. Rows are each
/// original_length long and sum to the analyzed signal.
std::vector<std::vector<double>> feature_channels(const WaveletCoeffs& coeffs,
                                                  const WaveletSpec& spec);
std::vector<std::vector<double>> feature_channels(std::span<const double> signal,
                                                  const WaveletSpec& spec,
                                                  int levels);

}  // namespace wavehits::wavelet
