#pragma once

#include <span>
#include <utility>
#include <vector>

namespace wavehits::circular {

/**
 * @brief A wind observation: scalar speed plus meteorological FROM-bearing.
 *
 * Direction follows the meteorological convention: the compass bearing the
 * wind blows from, 0 deg = North, increasing clockwise, always in [0, 360).
 */
struct WindSample {
    double speed = 0.0;      ///< m/s, non-negative
    double direction = 0.0;  ///< degrees in [0, 360)
    bool calm = false;       ///< set when recovered from a zero vector; direction is then meaningless
};

/// East-west (u) and north-south (v) wind vector components in m/s.
struct UVPair {
    double u = 0.0;
    double v = 0.0;
};

/// Wraps any angle in degrees into [0, 360).
double wrap_degrees(double degrees);

/// Decomposes a wind sample into u/v components:
/// u = -speed * sin(dir), v = -speed * cos(dir). Speed is preserved:
/// hypot(u, v) == speed.
UVPair to_uv(const WindSample& sample);

/// Inverse of to_uv. Recovers speed = hypot(u, v) and the FROM-bearing
/// direction = atan2(-u, -v) wrapped to [0, 360). A zero vector yields
/// speed 0, direction 0 and the calm flag.
WindSample from_uv(const UVPair& uv);

/// Shortest angular distance on the circle, in [0, 180].
/// Both arguments must be in [0, 360).
double angular_diff(double a_deg, double b_deg);

/// Circular mean of a set of bearings, in [0, 360). Returns 0 when the
/// resultant vector is zero (the mean is undefined there).
double circular_mean(std::span<const double> directions_deg);

// ---------------------------------------------------------------------------
// Periodic-aware evaluation metrics. All series are degrees in [0, 360).
// Every metric throws std::invalid_argument on empty input or length
// mismatch.
// ---------------------------------------------------------------------------

/// Mean of angular_diff over all pairs, degrees.
double mae_periodic(std::span<const double> pred, std::span<const double> truth);

/// sqrt(mean(angular_diff^2)), degrees.
double rmse_periodic(std::span<const double> pred, std::span<const double> truth);

/// mae_periodic divided by the arithmetic mean of the true series.
/// Requires mean(truth) > 0.
double rmae_periodic(std::span<const double> pred, std::span<const double> truth);

/// Vector correlation coefficient: normalized inner product between the
/// predicted and true vector sets, in [-1, 1]. Requires a nonzero vector on
/// each side.
double vcc(std::span<const UVPair> pred, std::span<const UVPair> truth);

/// Fraction of pairs with angular_diff <= delta_deg, in [0, 1].
double hit_rate(std::span<const double> pred, std::span<const double> truth,
                double delta_deg = 15.0);

/// Coefficient of determination per component: (r2_u, r2_v), each
/// 1 - SS_res / SS_tot. Requires length >= 2 and nonzero variance in each
/// true component.
std::pair<double, double> r2_components(std::span<const UVPair> pred,
                                        std::span<const UVPair> truth);

/// Direction-level coefficient of determination:
/// 1 - sum(angular_diff(pred, truth)^2) /
///     sum(angular_diff(truth, circular_mean(truth))^2).
/// A reconstruction for reporting; requires nonzero angular spread in truth.
double r2_direction(std::span<const double> pred, std::span<const double> truth);

}  // namespace wavehits::circular
