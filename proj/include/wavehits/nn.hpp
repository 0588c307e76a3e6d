#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace wavehits::nn {

/// Dense row-major matrix of 64-bit reals. Also used as a column vector the
/// shape [n x 1] for biases so every trainable parameter shares one type.
struct Tensor2 {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Tensor2() = default;
    Tensor2(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t size() const { return data.size(); }
    void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

enum class Activation { relu, identity };

struct DenseLayer {
    Tensor2 weights;  // [out x in]
    Tensor2 bias;     // [out x 1]
    Activation activation = Activation::identity;

    std::size_t in_width() const { return weights.cols; }
    std::size_t out_width() const { return weights.rows; }
};

/// A stack of dense layers; consecutive widths must chain.
struct Mlp {
    std::vector<DenseLayer> layers;

    std::size_t in_width() const { return layers.front().in_width(); }
    std::size_t out_width() const { return layers.back().out_width(); }
};

/// Activations recorded by mlp_forward for the exact backward pass.
struct MlpCache {
    std::vector<std::vector<double>> inputs;   // input seen by each layer
    std::vector<std::vector<double>> preacts;  // Wx + b per layer
    std::vector<double> output;
};

std::vector<double> dense_forward(const DenseLayer& layer, std::span<const double> x);

MlpCache mlp_forward(const Mlp& mlp, std::span<const double> x);

/// Exact gradients of the cached forward pass. Parameter gradients are
/// accumulated (+=) into param_grads, ordered [W0, b0, W1, b1, ...]; returns
/// the gradient with respect to the input.
std::vector<double> mlp_backward(const Mlp& mlp, const MlpCache& cache,
                                 std::span<const double> output_grad,
                                 std::span<Tensor2> param_grads);

/// Builds [input, hidden..., output] with relu on hidden layers, identity on
/// the output layer, and seeded He-uniform fan-in initialization.
Mlp make_mlp(std::span<const std::size_t> widths, std::uint64_t seed);

std::vector<Tensor2*> parameters(Mlp& mlp);
std::vector<Tensor2> zero_grads_like(std::span<Tensor2* const> params);

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected first/second moment state shaped like the parameter list.
struct AdamState {
    AdamConfig config;
    long step = 0;
    std::vector<Tensor2> m, v;

    AdamState() = default;
    AdamState(std::span<Tensor2* const> params, AdamConfig cfg);
};

void adam_step(std::span<Tensor2* const> params, std::span<const Tensor2> grads,
               AdamState& state);

// ---------------------------------------------------------------------------
// Gradient verification
// ---------------------------------------------------------------------------

struct GradCheckReport {
    double max_discrepancy = 0.0;  // relative to max(|analytic|, |numeric|, 1)
    std::size_t worst_param = 0;
    std::size_t worst_index = 0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Compares analytic gradients against central finite differences (step h)
/// over every parameter element. loss_fn evaluates the loss at the current
/// parameter values; grad_fn fills one gradient tensor per parameter.
/// Throws if the loss is non-finite.
GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::function<std::vector<Tensor2>()>& grad_fn,
                           std::span<Tensor2* const> params, double tolerance,
                           double h = 1e-5);

}  // namespace wavehits::nn
