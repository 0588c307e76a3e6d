#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "wavehits/circular.hpp"
#include "wavehits/util.hpp"

using namespace wavehits;
using namespace wavehits::circular;
using Catch::Approx;

namespace {

// Independent oracle: the shortest angular distance is the minimum of
// |a - b + 360k| over k in {-1, 0, 1}.
double oracle_angular_diff(double a, double b) {
    double best = std::fabs(a - b);
    for (int k : {-1, 1}) best = std::min(best, std::fabs(a - b + 360.0 * k));
    return best;
}

std::vector<double> random_directions(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> out(n);
    for (auto& d : out) d = util::uniform_range(rng, 0.0, 360.0);
    return out;
}

}  // namespace

TEST_CASE("to_uv matches the decomposition formulas", "[circular]") {
    auto uv = to_uv({1.0, 0.0, false});
    CHECK(uv.u == Approx(0.0).margin(1e-15));
    CHECK(uv.v == Approx(-1.0).margin(1e-15));

    uv = to_uv({2.0, 90.0, false});
    CHECK(uv.u == Approx(-2.0).margin(1e-15));
    CHECK(uv.v == Approx(0.0).margin(1e-15));

    // -1*sin(225 deg) = -1*cos(225 deg) = sqrt(2)/2
    uv = to_uv({1.0, 225.0, false});
    CHECK(uv.u == Approx(0.70710678118654746).margin(1e-12));
    CHECK(uv.v == Approx(0.70710678118654746).margin(1e-12));

    CHECK_THROWS_AS(to_uv({-1.0, 10.0, false}), std::invalid_argument);
    CHECK_THROWS_AS(to_uv({1.0, 360.0, false}), std::invalid_argument);
}

TEST_CASE("from_uv inverts to_uv and flags calm", "[circular]") {
    auto s = from_uv({0.0, -1.0});
    CHECK(s.speed == Approx(1.0));
    CHECK(s.direction == Approx(0.0).margin(1e-12));
    CHECK_FALSE(s.calm);

    s = from_uv({-2.0, 0.0});
    CHECK(s.speed == Approx(2.0));
    CHECK(s.direction == Approx(90.0).margin(1e-12));

    auto round = from_uv(to_uv({3.5, 123.4, false}));
    CHECK(round.speed == Approx(3.5).margin(1e-9));
    CHECK(angular_diff(round.direction, 123.4) < 1e-9);

    const auto calm = from_uv({0.0, 0.0});
    CHECK(calm.calm);
    CHECK(calm.speed == 0.0);
    CHECK(calm.direction == 0.0);
}

TEST_CASE("round trip holds over the whole domain", "[circular]") {
    std::mt19937_64 rng(20240117);
    for (int i = 0; i < 2000; ++i) {
        const double speed = util::uniform_range(rng, 1e-6, 50.0);
        const double dir = util::uniform_range(rng, 0.0, 360.0);
        const auto uv = to_uv({speed, dir, false});
        CHECK(std::fabs(std::hypot(uv.u, uv.v) - speed) < 1e-9);  // speed preserved
        const auto back = from_uv(uv);
        CHECK(std::fabs(back.speed - speed) < 1e-9);
        CHECK(angular_diff(back.direction, dir) < 1e-9);
    }
}

TEST_CASE("angular_diff semantics at the north boundary", "[circular]") {
    CHECK(angular_diff(359.0, 1.0) == 2.0);
    CHECK(angular_diff(180.0, 180.0) == 0.0);
    CHECK(angular_diff(350.0, 170.0) == 180.0);
}

TEST_CASE("angular_diff symmetry, bounds and triangle inequality", "[circular]") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 3000; ++i) {
        const double a = util::uniform_range(rng, 0.0, 360.0);
        const double b = util::uniform_range(rng, 0.0, 360.0);
        const double c = util::uniform_range(rng, 0.0, 360.0);
        const double ab = angular_diff(a, b);
        CHECK(ab == angular_diff(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 180.0);
        CHECK(ab <= angular_diff(a, c) + angular_diff(c, b) + 1e-12);
        CHECK(std::fabs(ab - oracle_angular_diff(a, b)) < 1e-12);
    }
}

TEST_CASE("mae_periodic", "[circular]") {
    const std::vector<double> p1{359.0}, t1{1.0};
    CHECK(mae_periodic(p1, t1) == Approx(2.0));

    const std::vector<double> same{12.0, 250.0, 359.9};
    CHECK(mae_periodic(same, same) == 0.0);

    const std::vector<double> p2{0.0, 90.0}, t2{90.0, 0.0};
    CHECK(mae_periodic(p2, t2) == Approx(90.0));

    CHECK_THROWS_AS(mae_periodic({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(mae_periodic(p2, p1), std::invalid_argument);
}

TEST_CASE("rmse_periodic", "[circular]") {
    const std::vector<double> p1{359.0}, t1{1.0};
    CHECK(rmse_periodic(p1, t1) == Approx(2.0));
    const std::vector<double> same{45.0, 45.0};
    CHECK(rmse_periodic(same, same) == 0.0);
    const std::vector<double> p2{0.0, 90.0}, t2{90.0, 0.0};
    CHECK(rmse_periodic(p2, t2) == Approx(90.0));
}

TEST_CASE("rmae_periodic divides by the arithmetic mean of truth", "[circular]") {
    const std::vector<double> p1{359.0}, t1{1.0};
    CHECK(rmae_periodic(p1, t1) == Approx(2.0));

    const std::vector<double> t2{100.0, 200.0};
    CHECK(rmae_periodic(t2, t2) == 0.0);

    const std::vector<double> p3{110.0, 210.0}, t3{100.0, 200.0};
    CHECK(rmae_periodic(p3, t3) == Approx(10.0 / 150.0));

    const std::vector<double> zeros{0.0, 0.0};
    CHECK_THROWS_AS(rmae_periodic(zeros, zeros), std::invalid_argument);
}

TEST_CASE("vcc alignment and degenerate inputs", "[circular]") {
    const std::vector<UVPair> a{{1.0, 2.0}, {-0.5, 0.25}};
    CHECK(vcc(a, a) == Approx(1.0));

    std::vector<UVPair> neg = a;
    for (auto& p : neg) {
        p.u = -p.u;
        p.v = -p.v;
    }
    CHECK(vcc(neg, a) == Approx(-1.0));

    const std::vector<UVPair> px{{1.0, 0.0}}, py{{0.0, 1.0}};
    CHECK(vcc(px, py) == Approx(0.0).margin(1e-15));

    const std::vector<UVPair> zero{{0.0, 0.0}};
    CHECK_THROWS_AS(vcc(zero, px), std::invalid_argument);
}

TEST_CASE("vcc is invariant to a common positive rescaling", "[circular]") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<UVPair> p(20), t(20);
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = {util::uniform_range(rng, -5, 5), util::uniform_range(rng, -5, 5)};
            t[i] = {util::uniform_range(rng, -5, 5), util::uniform_range(rng, -5, 5)};
        }
        const double base = vcc(p, t);
        const double scale = util::uniform_range(rng, 0.1, 10.0);
        std::vector<UVPair> ps = p, ts = t;
        for (std::size_t i = 0; i < p.size(); ++i) {
            ps[i].u *= scale;
            ps[i].v *= scale;
            ts[i].u *= scale;
            ts[i].v *= scale;
        }
        CHECK(std::fabs(vcc(ps, ts) - base) < 1e-12);
    }
}

TEST_CASE("hit_rate", "[circular]") {
    const std::vector<double> t{20.0, 250.0};
    CHECK(hit_rate(t, t, 0.0) == 1.0);
    const std::vector<double> p{10.0, 200.0}, t2{20.0, 250.0};
    CHECK(hit_rate(p, t2, 15.0) == Approx(0.5));
    const std::vector<double> p3{359.0}, t3{1.0};
    CHECK(hit_rate(p3, t3, 15.0) == 1.0);
}

TEST_CASE("hit_rate is monotone non-decreasing in delta", "[circular]") {
    std::mt19937_64 rng(31);
    const auto pred = random_directions(rng, 200);
    const auto truth = random_directions(rng, 200);
    double prev = -1.0;
    for (double delta = 0.0; delta <= 180.0; delta += 7.5) {
        const double hr = hit_rate(pred, truth, delta);
        CHECK(hr >= prev);
        prev = hr;
    }
    CHECK(prev == 1.0);  // delta = 180 covers the whole circle
}

TEST_CASE("metric suite agrees with the brute-force oracle", "[circular]") {
    std::mt19937_64 rng(123456);
    for (int series = 0; series < 200; ++series) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng() % 64);
        const auto pred = random_directions(rng, n);
        const auto truth = random_directions(rng, n);

        double mae = 0.0, mse = 0.0, hits = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = oracle_angular_diff(pred[i], truth[i]);
            mae += d;
            mse += d * d;
            if (d <= 15.0) hits += 1.0;
        }
        mae /= static_cast<double>(n);
        mse /= static_cast<double>(n);
        hits /= static_cast<double>(n);

        CHECK(std::fabs(mae_periodic(pred, truth) - mae) < 1e-12);
        CHECK(std::fabs(rmse_periodic(pred, truth) - std::sqrt(mse)) < 1e-12);
        CHECK(std::fabs(hit_rate(pred, truth, 15.0) - hits) < 1e-12);
    }
}

TEST_CASE("r2_components", "[circular]") {
    const std::vector<UVPair> t{{0.0, 0.0}, {1.0, 1.0}};
    auto [ru, rv] = r2_components(t, t);
    CHECK(ru == Approx(1.0));
    CHECK(rv == Approx(1.0));

    // Predicting the component-wise mean gives exactly zero skill.
    const std::vector<UVPair> mean_pred{{0.5, 0.5}, {0.5, 0.5}};
    std::tie(ru, rv) = r2_components(mean_pred, t);
    CHECK(ru == Approx(0.0).margin(1e-15));
    CHECK(rv == Approx(0.0).margin(1e-15));

    // SS_res = 0 + 1 = 1 per component, SS_tot = 0.25 + 0.25 = 0.5,
    // so 1 - SS_res/SS_tot = -1.
    const std::vector<UVPair> p{{0.0, 0.0}, {2.0, 2.0}};
    std::tie(ru, rv) = r2_components(p, t);
    CHECK(ru == Approx(-1.0));
    CHECK(rv == Approx(-1.0));

    const std::vector<UVPair> flat{{1.0, 0.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(r2_components(flat, flat), std::invalid_argument);  // zero u variance
    CHECK_THROWS_AS(r2_components(t, std::vector<UVPair>{{0, 0}}), std::invalid_argument);
}

TEST_CASE("r2_direction uses angular distances around the circular mean", "[circular]") {
    const std::vector<double> t{350.0, 10.0, 0.0, 355.0};
    CHECK(r2_direction(t, t) == Approx(1.0));

    // Error equal to the spread gives zero; larger error goes negative.
    std::mt19937_64 rng(5);
    const auto truth = random_directions(rng, 100);
    const auto junk = random_directions(rng, 100);
    CHECK(r2_direction(junk, truth) < 1.0);

    const std::vector<double> constant{42.0, 42.0};
    CHECK_THROWS_AS(r2_direction(constant, constant), std::invalid_argument);
}

TEST_CASE("circular_mean crosses the boundary correctly", "[circular]") {
    const std::vector<double> near_north{350.0, 10.0};
    CHECK(angular_diff(circular_mean(near_north), 0.0) < 1e-9);
    const std::vector<double> south{170.0, 190.0};
    CHECK(circular_mean(south) == Approx(180.0));
}

TEST_CASE("wrap_degrees lands in [0, 360)", "[circular]") {
    CHECK(wrap_degrees(360.0) == 0.0);
    CHECK(wrap_degrees(-0.0) == 0.0);
    CHECK(wrap_degrees(721.5) == Approx(1.5));
    CHECK(wrap_degrees(-1.0) == Approx(359.0));
    CHECK(wrap_degrees(-1e-16) < 360.0);  // must not round up onto 360
    std::mt19937_64 rng(77);
    for (int i = 0; i < 1000; ++i) {
        const double w = wrap_degrees(util::uniform_range(rng, -1e4, 1e4));
        CHECK(w >= 0.0);
        CHECK(w < 360.0);
    }
}
