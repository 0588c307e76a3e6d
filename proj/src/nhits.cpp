#include "wavehits/nhits.hpp"

#include <stdexcept>

#include "wavehits/util.hpp"

namespace wavehits::nhits {

namespace {

std::size_t pooled_length(std::size_t n, int kernel) {
    return (n + static_cast<std::size_t>(kernel) - 1) / static_cast<std::size_t>(kernel);
}

std::size_t block_output_width(const BlockConfig& cfg, std::size_t n_targets) {
    return n_targets * (cfg.n_backcast_knots + cfg.n_forecast_knots);
}

void validate_block_config(const BlockConfig& cfg) {
    if (cfg.pool_kernel < 1)
        throw std::invalid_argument("block config: pool kernel must be >= 1");
    if (cfg.input_length == 0 || cfg.horizon == 0)
        throw std::invalid_argument("block config: input length and horizon must be positive");
    if (cfg.n_backcast_knots < 2 || cfg.n_backcast_knots > cfg.input_length)
        throw std::invalid_argument("block config: backcast knots outside [2, L]");
    if (cfg.n_forecast_knots < 2 || cfg.n_forecast_knots > cfg.horizon)
        throw std::invalid_argument("block config: forecast knots outside [2, H]");
}

// Adjoint of interpolate_basis: scatters an output-grid gradient back onto
// the knots.
void interpolate_adjoint(std::span<const double> out_grad, std::size_t n_knots,
                         std::span<double> knot_grad) {
    const std::size_t target_len = out_grad.size();
    if (target_len == 1) {
        knot_grad[0] += out_grad[0];
        return;
    }
    const double scale = static_cast<double>(n_knots - 1) / static_cast<double>(target_len - 1);
    for (std::size_t t = 0; t < target_len; ++t) {
        const double pos = static_cast<double>(t) * scale;
        std::size_t i0 = static_cast<std::size_t>(pos);
        if (i0 > n_knots - 2) i0 = n_knots - 2;
        const double w = pos - static_cast<double>(i0);
        knot_grad[i0] += (1.0 - w) * out_grad[t];
        knot_grad[i0 + 1] += w * out_grad[t];
    }
}

}  // namespace

std::vector<double> maxpool(std::span<const double> x, int kernel) {
    if (x.empty()) throw std::invalid_argument("maxpool: empty input");
    if (kernel < 1) throw std::invalid_argument("maxpool: kernel must be >= 1");
    const std::size_t k = static_cast<std::size_t>(kernel);
    std::vector<double> out;
    out.reserve(pooled_length(x.size(), kernel));
    for (std::size_t start = 0; start < x.size(); start += k) {
        const std::size_t end = std::min(start + k, x.size());
        double best = x[start];
        for (std::size_t i = start + 1; i < end; ++i)
            if (x[i] > best) best = x[i];
        out.push_back(best);
    }
    return out;
}

std::vector<double> interpolate_basis(std::span<const double> knots,
                                      std::size_t target_len) {
    if (knots.size() < 2)
        throw std::invalid_argument("interpolate_basis: need at least 2 knots");
    if (target_len == 0)
        throw std::invalid_argument("interpolate_basis: target length must be >= 1");
    std::vector<double> out(target_len);
    if (target_len == 1) {
        out[0] = knots[0];
        return out;
    }
    const double scale =
        static_cast<double>(knots.size() - 1) / static_cast<double>(target_len - 1);
    for (std::size_t t = 0; t < target_len; ++t) {
        const double pos = static_cast<double>(t) * scale;
        std::size_t i0 = static_cast<std::size_t>(pos);
        if (i0 > knots.size() - 2) i0 = knots.size() - 2;
        const double w = pos - static_cast<double>(i0);
        out[t] = (1.0 - w) * knots[i0] + w * knots[i0 + 1];
    }
    return out;
}

BlockOutput block_forward(const Block& block, std::size_t n_targets,
                          const nn::Tensor2& input, BlockCache* cache) {
    const BlockConfig& cfg = block.config;
    if (input.cols != cfg.input_length)
        throw std::invalid_argument("block_forward: input length mismatch");
    const std::size_t channels = input.rows;
    const std::size_t lp = pooled_length(cfg.input_length, cfg.pool_kernel);

    std::vector<double> flat(channels * lp);
    std::vector<std::size_t> argmax(channels * lp);
    const std::size_t k = static_cast<std::size_t>(cfg.pool_kernel);
    for (std::size_t c = 0; c < channels; ++c) {
        const double* row = &input.data[c * input.cols];
        std::size_t p = 0;
        for (std::size_t start = 0; start < input.cols; start += k, ++p) {
            const std::size_t end = std::min(start + k, input.cols);
            double best = row[start];
            std::size_t best_i = start;
            for (std::size_t i = start + 1; i < end; ++i)
                if (row[i] > best) {  // strict: ties keep the earliest index
                    best = row[i];
                    best_i = i;
                }
            flat[c * lp + p] = best;
            argmax[c * lp + p] = best_i;
        }
    }

    nn::MlpCache local_cache = nn::mlp_forward(block.net, flat);
    const std::vector<double>& out = local_cache.output;
    if (out.size() != block_output_width(cfg, n_targets))
        throw std::invalid_argument("block_forward: coefficient network output width mismatch");

    BlockOutput result;
    result.backcast = nn::Tensor2(n_targets, cfg.input_length);
    result.forecast = nn::Tensor2(n_targets, cfg.horizon);
    const std::size_t per_target = cfg.n_backcast_knots + cfg.n_forecast_knots;
    for (std::size_t t = 0; t < n_targets; ++t) {
        const double* knots = &out[t * per_target];
        const auto back = interpolate_basis({knots, cfg.n_backcast_knots}, cfg.input_length);
        const auto fore = interpolate_basis({knots + cfg.n_backcast_knots, cfg.n_forecast_knots},
                                            cfg.horizon);
        std::copy(back.begin(), back.end(), &result.backcast.data[t * cfg.input_length]);
        std::copy(fore.begin(), fore.end(), &result.forecast.data[t * cfg.horizon]);
    }

    if (cache) {
        cache->pooled_cols = lp;
        cache->argmax = std::move(argmax);
        cache->mlp = std::move(local_cache);
    }
    return result;
}

nn::Tensor2 block_backward(const Block& block, std::size_t n_targets,
                           const BlockCache& cache, const nn::Tensor2& backcast_grad,
                           const nn::Tensor2& forecast_grad,
                           std::span<nn::Tensor2> param_grads) {
    const BlockConfig& cfg = block.config;
    if (backcast_grad.rows != n_targets || backcast_grad.cols != cfg.input_length ||
        forecast_grad.rows != n_targets || forecast_grad.cols != cfg.horizon)
        throw std::invalid_argument("block_backward: gradient shape mismatch");
    const std::size_t lp = cache.pooled_cols;
    if (lp == 0 || cache.mlp.inputs.empty())
        throw std::invalid_argument("block_backward: stale or missing cache");

    const std::size_t per_target = cfg.n_backcast_knots + cfg.n_forecast_knots;
    std::vector<double> out_grad(n_targets * per_target, 0.0);
    for (std::size_t t = 0; t < n_targets; ++t) {
        interpolate_adjoint({&backcast_grad.data[t * cfg.input_length], cfg.input_length},
                            cfg.n_backcast_knots,
                            {&out_grad[t * per_target], cfg.n_backcast_knots});
        interpolate_adjoint({&forecast_grad.data[t * cfg.horizon], cfg.horizon},
                            cfg.n_forecast_knots,
                            {&out_grad[t * per_target + cfg.n_backcast_knots],
                             cfg.n_forecast_knots});
    }

    const std::vector<double> flat_grad =
        nn::mlp_backward(block.net, cache.mlp, out_grad, param_grads);

    const std::size_t channels = flat_grad.size() / lp;
    nn::Tensor2 input_grad(channels, cfg.input_length);
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t p = 0; p < lp; ++p)
            input_grad(c, cache.argmax[c * lp + p]) += flat_grad[c * lp + p];
    return input_grad;
}

NhitsModel make_model(const ModelSpec& spec, std::uint64_t seed) {
    if (spec.pool_kernels.empty())
        throw std::invalid_argument("make_model: need at least one block");
    if (spec.pool_kernels.size() != spec.backcast_knots.size() ||
        spec.pool_kernels.size() != spec.forecast_knots.size())
        throw std::invalid_argument("make_model: per-block lists must have equal lengths");
    if (spec.target_channels.empty())
        throw std::invalid_argument("make_model: need at least one target channel");
    for (std::size_t t : spec.target_channels)
        if (t >= spec.input_channels)
            throw std::invalid_argument("make_model: target channel out of range");

    NhitsModel model;
    model.input_channels = spec.input_channels;
    model.input_length = spec.input_length;
    model.horizon = spec.horizon;
    model.target_channels = spec.target_channels;

    for (std::size_t b = 0; b < spec.pool_kernels.size(); ++b) {
        Block block;
        block.config.pool_kernel = spec.pool_kernels[b];
        block.config.hidden_widths = spec.hidden_widths;
        block.config.n_backcast_knots = spec.backcast_knots[b];
        block.config.n_forecast_knots = spec.forecast_knots[b];
        block.config.input_length = spec.input_length;
        block.config.horizon = spec.horizon;
        validate_block_config(block.config);

        std::vector<std::size_t> widths;
        widths.push_back(spec.input_channels *
                         pooled_length(spec.input_length, block.config.pool_kernel));
        for (std::size_t w : spec.hidden_widths) widths.push_back(w);
        widths.push_back(block_output_width(block.config, spec.target_channels.size()));
        block.net = nn::make_mlp(widths, util::mix_seed(seed, 0x6b10c5 + b));
        model.blocks.push_back(std::move(block));
    }
    return model;
}

std::vector<nn::Tensor2*> NhitsModel::parameters() {
    std::vector<nn::Tensor2*> params;
    for (auto& block : blocks)
        for (auto& layer : block.net.layers) {
            params.push_back(&layer.weights);
            params.push_back(&layer.bias);
        }
    return params;
}

std::vector<const nn::Tensor2*> NhitsModel::parameters() const {
    std::vector<const nn::Tensor2*> params;
    for (const auto& block : blocks)
        for (const auto& layer : block.net.layers) {
            params.push_back(&layer.weights);
            params.push_back(&layer.bias);
        }
    return params;
}

ModelOutput model_forward(const NhitsModel& model, const nn::Tensor2& input,
                          ModelCache* cache) {
    if (input.rows != model.input_channels || input.cols != model.input_length)
        throw std::invalid_argument("model_forward: input shape mismatch");
    const std::size_t n_t = model.n_targets();
    const std::size_t L = model.input_length;

    ModelOutput out;
    out.forecast = nn::Tensor2(n_t, model.horizon);

    nn::Tensor2 residual(n_t, L);
    for (std::size_t t = 0; t < n_t; ++t)
        std::copy(&input.data[model.target_channels[t] * L],
                  &input.data[model.target_channels[t] * L] + L, &residual.data[t * L]);

    if (cache) {
        cache->blocks.assign(model.blocks.size(), BlockCache{});
        cache->channels = input.rows;
        cache->length = L;
    }

    nn::Tensor2 working = input;
    for (std::size_t b = 0; b < model.blocks.size(); ++b) {
        // Target rows carry the running residual; exogenous rows stay fixed.
        for (std::size_t t = 0; t < n_t; ++t)
            std::copy(&residual.data[t * L], &residual.data[t * L] + L,
                      &working.data[model.target_channels[t] * L]);

        BlockOutput bo = block_forward(model.blocks[b], n_t, working,
                                       cache ? &cache->blocks[b] : nullptr);
        for (std::size_t i = 0; i < residual.data.size(); ++i)
            residual.data[i] -= bo.backcast.data[i];
        for (std::size_t i = 0; i < out.forecast.data.size(); ++i)
            out.forecast.data[i] += bo.forecast.data[i];

        out.backcasts.push_back(std::move(bo.backcast));
        out.forecasts.push_back(std::move(bo.forecast));
        out.residuals.push_back(residual);
    }
    return out;
}

void model_backward(const NhitsModel& model, const ModelCache& cache,
                    const nn::Tensor2& forecast_grad,
                    std::span<nn::Tensor2> param_grads) {
    const std::size_t n_t = model.n_targets();
    if (cache.blocks.size() != model.blocks.size())
        throw std::invalid_argument("model_backward: cache does not match this model");
    if (forecast_grad.rows != n_t || forecast_grad.cols != model.horizon)
        throw std::invalid_argument("model_backward: forecast gradient shape mismatch");

    std::size_t expected = 0;
    for (const auto& block : model.blocks) expected += 2 * block.net.layers.size();
    if (param_grads.size() != expected)
        throw std::invalid_argument("model_backward: gradient list size mismatch");

    // Running gradient with respect to the residual entering each block.
    nn::Tensor2 residual_grad(n_t, model.input_length);

    std::size_t grad_offset = expected;
    for (std::size_t b = model.blocks.size(); b-- > 0;) {
        const std::size_t n_block_params = 2 * model.blocks[b].net.layers.size();
        grad_offset -= n_block_params;

        nn::Tensor2 backcast_grad(n_t, model.input_length);
        for (std::size_t i = 0; i < backcast_grad.data.size(); ++i)
            backcast_grad.data[i] = -residual_grad.data[i];

        nn::Tensor2 input_grad = block_backward(
            model.blocks[b], n_t, cache.blocks[b], backcast_grad, forecast_grad,
            param_grads.subspan(grad_offset, n_block_params));

        for (std::size_t t = 0; t < n_t; ++t) {
            const double* src = &input_grad.data[model.target_channels[t] * model.input_length];
            double* dst = &residual_grad.data[t * model.input_length];
            for (std::size_t i = 0; i < model.input_length; ++i) dst[i] += src[i];
        }
    }
}

}  // namespace wavehits::nhits
