#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "wavehits/nn.hpp"
#include "wavehits/util.hpp"

using namespace wavehits;
using namespace wavehits::nn;
using Catch::Approx;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                  double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = util::uniform_range(rng, lo, hi);
    return v;
}

// Straight-line recomputation of a two-layer net, written without reusing
// the library's forward path.
std::vector<double> straight_line_two_layer(const Mlp& mlp, const std::vector<double>& x) {
    const auto& l0 = mlp.layers[0];
    const auto& l1 = mlp.layers[1];
    std::vector<double> h(l0.out_width());
    for (std::size_t o = 0; o < h.size(); ++o) {
        double acc = l0.bias(o, 0);
        for (std::size_t i = 0; i < l0.in_width(); ++i) acc += l0.weights(o, i) * x[i];
        h[o] = acc > 0.0 ? acc : 0.0;
    }
    std::vector<double> y(l1.out_width());
    for (std::size_t o = 0; o < y.size(); ++o) {
        double acc = l1.bias(o, 0);
        for (std::size_t i = 0; i < l1.in_width(); ++i) acc += l1.weights(o, i) * h[i];
        y[o] = acc;
    }
    return y;
}

double mse_loss(std::span<const double> out, std::span<const double> target) {
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) acc += (out[i] - target[i]) * (out[i] - target[i]);
    return acc / static_cast<double>(out.size());
}

}  // namespace

TEST_CASE("dense_forward basics", "[nn]") {
    DenseLayer zero;
    zero.weights = Tensor2(3, 2);
    zero.bias = Tensor2(3, 1);
    zero.activation = Activation::relu;
    for (double y : dense_forward(zero, std::vector<double>{1.0, -2.0})) CHECK(y == 0.0);

    DenseLayer ident;
    ident.weights = Tensor2(2, 2);
    ident.weights(0, 0) = 1.0;
    ident.weights(1, 1) = 1.0;
    ident.bias = Tensor2(2, 1);
    ident.activation = Activation::identity;
    const std::vector<double> x{0.5, -4.25};
    const auto y = dense_forward(ident, x);
    CHECK(y[0] == x[0]);
    CHECK(y[1] == x[1]);

    // relu(1 + 2 - 3) = relu(0) = 0
    DenseLayer edge;
    edge.weights = Tensor2(1, 2);
    edge.weights(0, 0) = 1.0;
    edge.weights(0, 1) = 2.0;
    edge.bias = Tensor2(1, 1);
    edge.bias(0, 0) = -3.0;
    edge.activation = Activation::relu;
    CHECK(dense_forward(edge, std::vector<double>{1.0, 1.0})[0] == 0.0);

    CHECK_THROWS_AS(dense_forward(edge, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("relu dense layer is 1-Lipschitz element-wise", "[nn]") {
    std::mt19937_64 rng(10);
    const std::size_t widths[] = {6, 4};
    auto mlp = make_mlp(widths, 99);
    mlp.layers[0].activation = Activation::relu;
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_vector(rng, 6);
        auto b = a;
        const std::size_t j = rng() % 6;
        const double eps = util::uniform_range(rng, -0.5, 0.5);
        b[j] += eps;
        const auto ya = dense_forward(mlp.layers[0], a);
        const auto yb = dense_forward(mlp.layers[0], b);
        for (std::size_t o = 0; o < ya.size(); ++o)
            CHECK(std::fabs(ya[o] - yb[o]) <=
                  std::fabs(mlp.layers[0].weights(o, j) * eps) + 1e-12);
    }
}

TEST_CASE("identity dense layer is affine (superposition)", "[nn]") {
    std::mt19937_64 rng(11);
    const std::size_t widths[] = {5, 3};
    auto mlp = make_mlp(widths, 7);
    auto& layer = mlp.layers[0];
    layer.activation = Activation::identity;
    const auto zero_out = dense_forward(layer, std::vector<double>(5, 0.0));
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = random_vector(rng, 5);
        const auto y = random_vector(rng, 5);
        const double a = util::uniform_range(rng, -2, 2);
        std::vector<double> mix(5);
        for (std::size_t i = 0; i < 5; ++i) mix[i] = a * x[i] + (1.0 - a) * y[i];
        const auto fx = dense_forward(layer, x);
        const auto fy = dense_forward(layer, y);
        const auto fmix = dense_forward(layer, mix);
        for (std::size_t o = 0; o < 3; ++o) {
            // affine: f(ax + (1-a)y) = a f(x) + (1-a) f(y) with the bias as f(0)
            const double expected = a * fx[o] + (1.0 - a) * fy[o];
            CHECK(fmix[o] == Approx(expected).margin(1e-12));
            (void)zero_out;
        }
    }
}

TEST_CASE("mlp_forward composes layers and matches an oracle", "[nn]") {
    const std::size_t one_layer[] = {4, 3};
    auto single = make_mlp(one_layer, 5);
    const std::vector<double> x{0.1, -0.2, 0.3, 0.4};
    const auto via_mlp = mlp_forward(single, x).output;
    const auto via_dense = dense_forward(single.layers[0], x);
    for (std::size_t i = 0; i < via_mlp.size(); ++i) CHECK(via_mlp[i] == via_dense[i]);

    // two identity layers with W = I reproduce the input
    Mlp identity;
    for (int li = 0; li < 2; ++li) {
        DenseLayer l;
        l.weights = Tensor2(4, 4);
        for (std::size_t i = 0; i < 4; ++i) l.weights(i, i) = 1.0;
        l.bias = Tensor2(4, 1);
        l.activation = Activation::identity;
        identity.layers.push_back(std::move(l));
    }
    const auto echoed = mlp_forward(identity, x).output;
    for (std::size_t i = 0; i < 4; ++i) CHECK(echoed[i] == x[i]);

    const std::size_t two_layer[] = {4, 6, 2};
    auto seeded = make_mlp(two_layer, 2024);
    const auto got = mlp_forward(seeded, x).output;
    const auto expect = straight_line_two_layer(seeded, x);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == Approx(expect[i]).margin(1e-12));

    const std::size_t bad[] = {3, 2};
    auto mismatched = make_mlp(bad, 1);
    CHECK_THROWS_AS(mlp_forward(mismatched, x), std::invalid_argument);
}

TEST_CASE("mlp_backward zero gradient and identity pass-through", "[nn]") {
    const std::size_t widths[] = {3, 3};
    auto mlp = make_mlp(widths, 9);
    const std::vector<double> x{0.4, -0.6, 1.1};
    const auto cache = mlp_forward(mlp, x);

    auto params = parameters(mlp);
    auto grads = zero_grads_like(params);
    const auto in_grad = mlp_backward(mlp, cache, std::vector<double>(3, 0.0), grads);
    for (double g : in_grad) CHECK(g == 0.0);
    for (const auto& g : grads)
        for (double v : g.data) CHECK(v == 0.0);

    Mlp identity;
    DenseLayer l;
    l.weights = Tensor2(3, 3);
    for (std::size_t i = 0; i < 3; ++i) l.weights(i, i) = 1.0;
    l.bias = Tensor2(3, 1);
    l.activation = Activation::identity;
    identity.layers.push_back(std::move(l));
    const auto id_cache = mlp_forward(identity, x);
    auto id_params = parameters(identity);
    auto id_grads = zero_grads_like(id_params);
    const std::vector<double> out_grad{1.0, -2.0, 0.5};
    const auto back = mlp_backward(identity, id_cache, out_grad, id_grads);
    for (std::size_t i = 0; i < 3; ++i) CHECK(back[i] == out_grad[i]);
}

TEST_CASE("mlp_backward matches central finite differences", "[nn]") {
    std::mt19937_64 rng(321);
    const std::size_t widths[] = {5, 8, 4};
    auto mlp = make_mlp(widths, 77);
    const auto x = random_vector(rng, 5);
    const auto target = random_vector(rng, 4);

    auto params = parameters(mlp);
    auto loss = [&]() { return mse_loss(mlp_forward(mlp, x).output, target); };
    auto analytic = [&]() {
        const auto cache = mlp_forward(mlp, x);
        std::vector<double> out_grad(4);
        for (std::size_t i = 0; i < 4; ++i)
            out_grad[i] = 2.0 * (cache.output[i] - target[i]) / 4.0;
        auto grads = zero_grads_like(params);
        mlp_backward(mlp, cache, out_grad, grads);
        return grads;
    };
    const auto report = grad_check(loss, analytic, params, 1e-4);
    INFO("max discrepancy " << report.max_discrepancy);
    CHECK(report.pass);
}

TEST_CASE("adam_step basics", "[nn]") {
    Tensor2 p(2, 2);
    p(0, 0) = 1.0;
    p(1, 1) = -2.0;
    const Tensor2 snapshot = p;
    std::vector<Tensor2*> params{&p};
    AdamState state(params, AdamConfig{});

    // zero gradient: parameters unchanged, step incremented
    std::vector<Tensor2> grads{Tensor2(2, 2)};
    adam_step(params, grads, state);
    CHECK(state.step == 1);
    for (std::size_t i = 0; i < p.data.size(); ++i) CHECK(p.data[i] == snapshot.data[i]);

    // first live step moves by about -lr * sign(g)
    AdamState fresh(params, AdamConfig{});
    grads[0](0, 0) = 3.7;
    grads[0](1, 1) = -0.004;
    const Tensor2 before = p;
    adam_step(params, grads, fresh);
    CHECK(p(0, 0) == Approx(before(0, 0) - 1e-3).epsilon(1e-4));
    CHECK(p(1, 1) == Approx(before(1, 1) + 1e-3).epsilon(1e-2));  // epsilon matters for small g

    std::vector<Tensor2> bad{Tensor2(1, 1)};
    CHECK_THROWS_AS(adam_step(params, bad, fresh), std::invalid_argument);
}

TEST_CASE("adam reduces a 1-D quadratic in two steps", "[nn]") {
    Tensor2 w(1, 1);
    w(0, 0) = 2.0;
    std::vector<Tensor2*> params{&w};
    AdamConfig cfg;
    cfg.learning_rate = 0.1;
    AdamState state(params, cfg);

    auto loss = [&]() { return w(0, 0) * w(0, 0); };
    const double initial = loss();
    for (int step = 0; step < 2; ++step) {
        std::vector<Tensor2> grads{Tensor2(1, 1)};
        grads[0](0, 0) = 2.0 * w(0, 0);
        adam_step(params, grads, state);
    }
    CHECK(loss() < initial);
}

TEST_CASE("training is deterministic given a seed", "[nn]") {
    auto run = [](std::uint64_t seed) {
        const std::size_t widths[] = {4, 8, 2};
        auto mlp = make_mlp(widths, seed);
        auto params = parameters(mlp);
        AdamState state(params, AdamConfig{});
        std::mt19937_64 rng(seed);
        for (int step = 0; step < 25; ++step) {
            const auto x = random_vector(rng, 4);
            const auto target = random_vector(rng, 2);
            const auto cache = mlp_forward(mlp, x);
            std::vector<double> out_grad(2);
            for (std::size_t i = 0; i < 2; ++i)
                out_grad[i] = 2.0 * (cache.output[i] - target[i]) / 2.0;
            auto grads = zero_grads_like(params);
            mlp_backward(mlp, cache, out_grad, grads);
            adam_step(params, grads, state);
        }
        std::vector<double> flat;
        for (const auto* p : params) flat.insert(flat.end(), p->data.begin(), p->data.end());
        return flat;
    };
    const auto a = run(1234);
    const auto b = run(1234);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);  // bit-identical

    const auto c = run(4321);
    bool any_different = false;
    for (std::size_t i = 0; i < a.size(); ++i) any_different |= (a[i] != c[i]);
    CHECK(any_different);
}

TEST_CASE("grad_check is exact for a linear model", "[nn]") {
    Tensor2 w(1, 3);
    w(0, 0) = 0.3;
    w(0, 1) = -1.2;
    w(0, 2) = 0.7;
    std::vector<Tensor2*> params{&w};
    const std::vector<double> x{0.25, 0.5, -0.75};

    auto loss = [&]() {
        double acc = 0.0;
        for (std::size_t i = 0; i < 3; ++i) acc += w(0, i) * x[i];
        return acc;
    };
    auto analytic = [&]() {
        std::vector<Tensor2> g{Tensor2(1, 3)};
        for (std::size_t i = 0; i < 3; ++i) g[0](0, i) = x[i];
        return g;
    };
    const auto report = grad_check(loss, analytic, params, 1e-9);
    INFO("max discrepancy " << report.max_discrepancy);
    CHECK(report.pass);
    CHECK(report.max_discrepancy < 1e-9);
}

TEST_CASE("grad_check fails at zero tolerance on a nonlinear net", "[nn]") {
    const std::size_t widths[] = {3, 5, 2};
    auto mlp = make_mlp(widths, 13);
    auto params = parameters(mlp);
    std::mt19937_64 rng(13);
    const auto x = random_vector(rng, 3, 0.2, 1.0);
    const auto target = random_vector(rng, 2);

    auto loss = [&]() { return mse_loss(mlp_forward(mlp, x).output, target); };
    auto analytic = [&]() {
        const auto cache = mlp_forward(mlp, x);
        std::vector<double> out_grad(2);
        for (std::size_t i = 0; i < 2; ++i)
            out_grad[i] = 2.0 * (cache.output[i] - target[i]) / 2.0;
        auto grads = zero_grads_like(params);
        mlp_backward(mlp, cache, out_grad, grads);
        return grads;
    };
    CHECK(grad_check(loss, analytic, params, 1e-4).pass);
    CHECK_FALSE(grad_check(loss, analytic, params, 0.0).pass);
}
