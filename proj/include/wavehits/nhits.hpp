#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wavehits/nn.hpp"

namespace wavehits::nhits {

/// Per-block knobs: pooling rate, coefficient-network widths and the number
/// of backcast/forecast interpolation knots.
struct BlockConfig {
    int pool_kernel = 1;
    std::vector<std::size_t> hidden_widths;
    std::size_t n_backcast_knots = 2;
    std::size_t n_forecast_knots = 2;
    std::size_t input_length = 0;  // L
    std::size_t horizon = 0;       // H
};

struct Block {
    BlockConfig config;
    nn::Mlp net;
};

/**
 * @brief Hierarchical interpolation forecaster.
 *
 * Blocks see the input at decreasing pooling rates; each maps its pooled
 * input through a dense network to backcast/forecast knots, expands them by
 * piecewise-linear interpolation, and passes a backcast residual to the next
 * block. The model forecast is the sum of the per-block forecasts.
 */
struct NhitsModel {
    std::vector<Block> blocks;
    std::size_t input_channels = 0;
    std::size_t input_length = 0;
    std::size_t horizon = 0;
    std::vector<std::size_t> target_channels;  // rows of the input that carry targets

    std::size_t n_targets() const { return target_channels.size(); }
    std::vector<nn::Tensor2*> parameters();
    std::vector<const nn::Tensor2*> parameters() const;
};

struct ModelSpec {
    std::size_t input_channels = 0;
    std::size_t input_length = 0;
    std::size_t horizon = 0;
    std::vector<std::size_t> target_channels;
    std::vector<int> pool_kernels;
    std::vector<std::size_t> hidden_widths;          // shared across blocks
    std::vector<std::size_t> backcast_knots;         // one per block
    std::vector<std::size_t> forecast_knots;         // one per block
};

NhitsModel make_model(const ModelSpec& spec, std::uint64_t seed);

/// H predicted steps for both wind components, in m/s.
struct ForecastPair {
    std::vector<double> u_path;
    std::vector<double> v_path;
};

/// Non-overlapping max pooling; a trailing partial window is reduced over
/// the elements it actually has. kernel == 1 is the identity.
std::vector<double> maxpool(std::span<const double> x, int kernel);

/// Expands knots to target_len samples: knots sit on an endpoint-inclusive
/// equally spaced grid with linear interpolation in between. Needs >= 2
/// knots.
std::vector<double> interpolate_basis(std::span<const double> knots,
                                      std::size_t target_len);

struct BlockCache {
    std::size_t pooled_cols = 0;
    std::vector<std::size_t> argmax;  // input column feeding each pooled cell
    nn::MlpCache mlp;
};

struct BlockOutput {
    nn::Tensor2 backcast;  // [targets x L]
    nn::Tensor2 forecast;  // [targets x H]
};

BlockOutput block_forward(const Block& block, std::size_t n_targets,
                          const nn::Tensor2& input, BlockCache* cache = nullptr);

/// Gradients of one block. dBackcast/dForecast flow in; parameter gradients
/// accumulate into param_grads ([W0, b0, ...] for this block's net); returns
/// the gradient with respect to the block input.
nn::Tensor2 block_backward(const Block& block, std::size_t n_targets,
                           const BlockCache& cache, const nn::Tensor2& backcast_grad,
                           const nn::Tensor2& forecast_grad,
                           std::span<nn::Tensor2> param_grads);

struct ModelCache {
    std::vector<BlockCache> blocks;
    std::size_t channels = 0, length = 0;
};

struct ModelOutput {
    nn::Tensor2 forecast;                  // [targets x H], sum over blocks
    std::vector<nn::Tensor2> backcasts;    // per block, [targets x L]
    std::vector<nn::Tensor2> forecasts;    // per block, [targets x H]
    std::vector<nn::Tensor2> residuals;    // residual after each block
};

ModelOutput model_forward(const NhitsModel& model, const nn::Tensor2& input,
                          ModelCache* cache = nullptr);

/// Exact gradients of model_forward through interpolation, max pooling
/// (argmax routing, earliest index on ties) and the residual chain.
/// param_grads must match model.parameters() order and accumulates (+=).
void model_backward(const NhitsModel& model, const ModelCache& cache,
                    const nn::Tensor2& forecast_grad,
                    std::span<nn::Tensor2> param_grads);

}  // namespace wavehits::nhits
