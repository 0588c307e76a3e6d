#include "wavehits/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "wavehits/util.hpp"

namespace wavehits::nn {

namespace {

inline double activate(Activation act, double z) {
    return act == Activation::relu ? (z > 0.0 ? z : 0.0) : z;
}

inline double activate_grad(Activation act, double z) {
    return act == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0;
}

}  // namespace

std::vector<double> dense_forward(const DenseLayer& layer, std::span<const double> x) {
    if (x.size() != layer.in_width())
        throw std::invalid_argument("dense_forward: input width " + std::to_string(x.size()) +
                                    " != layer width " + std::to_string(layer.in_width()));
    const std::size_t out = layer.out_width(), in = layer.in_width();
    std::vector<double> y(out);
    for (std::size_t o = 0; o < out; ++o) {
        const double* w = &layer.weights.data[o * in];
        double acc = layer.bias.data[o];
        for (std::size_t i = 0; i < in; ++i) acc += w[i] * x[i];
        y[o] = activate(layer.activation, acc);
    }
    return y;
}

MlpCache mlp_forward(const Mlp& mlp, std::span<const double> x) {
    if (mlp.layers.empty()) throw std::invalid_argument("mlp_forward: empty layer list");
    MlpCache cache;
    cache.inputs.reserve(mlp.layers.size());
    cache.preacts.reserve(mlp.layers.size());

    std::vector<double> current(x.begin(), x.end());
    for (const auto& layer : mlp.layers) {
        if (current.size() != layer.in_width())
            throw std::invalid_argument("mlp_forward: layer widths do not chain");
        const std::size_t out = layer.out_width(), in = layer.in_width();
        std::vector<double> z(out);
        for (std::size_t o = 0; o < out; ++o) {
            const double* w = &layer.weights.data[o * in];
            double acc = layer.bias.data[o];
            for (std::size_t i = 0; i < in; ++i) acc += w[i] * current[i];
            z[o] = acc;
        }
        cache.inputs.push_back(std::move(current));
        current.resize(out);
        for (std::size_t o = 0; o < out; ++o) current[o] = activate(layer.activation, z[o]);
        cache.preacts.push_back(std::move(z));
    }
    cache.output = current;
    return cache;
}

std::vector<double> mlp_backward(const Mlp& mlp, const MlpCache& cache,
                                 std::span<const double> output_grad,
                                 std::span<Tensor2> param_grads) {
    const std::size_t n_layers = mlp.layers.size();
    if (cache.inputs.size() != n_layers || cache.preacts.size() != n_layers)
        throw std::invalid_argument("mlp_backward: cache does not match this network");
    if (output_grad.size() != mlp.out_width())
        throw std::invalid_argument("mlp_backward: output gradient width mismatch");
    if (param_grads.size() != 2 * n_layers)
        throw std::invalid_argument("mlp_backward: expected one gradient per parameter");

    std::vector<double> da(output_grad.begin(), output_grad.end());
    for (std::size_t li = n_layers; li-- > 0;) {
        const auto& layer = mlp.layers[li];
        const auto& a_in = cache.inputs[li];
        const auto& z = cache.preacts[li];
        const std::size_t out = layer.out_width(), in = layer.in_width();
        if (a_in.size() != in || z.size() != out)
            throw std::invalid_argument("mlp_backward: stale cache shapes");

        Tensor2& dW = param_grads[2 * li];
        Tensor2& db = param_grads[2 * li + 1];
        if (dW.rows != out || dW.cols != in || db.rows != out)
            throw std::invalid_argument("mlp_backward: gradient tensor shape mismatch");

        std::vector<double> da_prev(in, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            const double dz = da[o] * activate_grad(layer.activation, z[o]);
            if (dz == 0.0) continue;
            double* dw_row = &dW.data[o * in];
            const double* w_row = &layer.weights.data[o * in];
            for (std::size_t i = 0; i < in; ++i) {
                dw_row[i] += dz * a_in[i];
                da_prev[i] += w_row[i] * dz;
            }
            db.data[o] += dz;
        }
        da = std::move(da_prev);
    }
    return da;
}

Mlp make_mlp(std::span<const std::size_t> widths, std::uint64_t seed) {
    if (widths.size() < 2)
        throw std::invalid_argument("make_mlp: need at least input and output widths");
    Mlp mlp;
    for (std::size_t li = 0; li + 1 < widths.size(); ++li) {
        DenseLayer layer;
        layer.weights = Tensor2(widths[li + 1], widths[li]);
        layer.bias = Tensor2(widths[li + 1], 1);
        layer.activation =
            (li + 2 == widths.size()) ? Activation::identity : Activation::relu;

        std::mt19937_64 rng(util::mix_seed(seed, li));
        const double bound = std::sqrt(6.0 / static_cast<double>(widths[li]));
        for (auto& w : layer.weights.data) w = util::uniform_range(rng, -bound, bound);
        mlp.layers.push_back(std::move(layer));
    }
    return mlp;
}

std::vector<Tensor2*> parameters(Mlp& mlp) {
    std::vector<Tensor2*> params;
    params.reserve(2 * mlp.layers.size());
    for (auto& layer : mlp.layers) {
        params.push_back(&layer.weights);
        params.push_back(&layer.bias);
    }
    return params;
}

std::vector<Tensor2> zero_grads_like(std::span<Tensor2* const> params) {
    std::vector<Tensor2> grads;
    grads.reserve(params.size());
    for (const Tensor2* p : params) grads.emplace_back(p->rows, p->cols);
    return grads;
}

AdamState::AdamState(std::span<Tensor2* const> params, AdamConfig cfg) : config(cfg) {
    m.reserve(params.size());
    v.reserve(params.size());
    for (const Tensor2* p : params) {
        m.emplace_back(p->rows, p->cols);
        v.emplace_back(p->rows, p->cols);
    }
}

void adam_step(std::span<Tensor2* const> params, std::span<const Tensor2> grads,
               AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
    state.step += 1;
    const auto& cfg = state.config;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor2& p = *params[pi];
        const Tensor2& g = grads[pi];
        if (p.rows != g.rows || p.cols != g.cols)
            throw std::invalid_argument("adam_step: gradient shape mismatch");
        Tensor2& m = state.m[pi];
        Tensor2& v = state.v[pi];
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
            v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
            const double m_hat = m.data[i] / bc1;
            const double v_hat = v.data[i] / bc2;
            p.data[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
}

GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::function<std::vector<Tensor2>()>& grad_fn,
                           std::span<Tensor2* const> params, double tolerance,
                           double h) {
    const double base = loss_fn();
    if (!std::isfinite(base)) throw std::runtime_error("grad_check: non-finite loss");

    const std::vector<Tensor2> analytic = grad_fn();
    if (analytic.size() != params.size())
        throw std::invalid_argument("grad_check: analytic gradient count mismatch");

    GradCheckReport report;
    report.tolerance = tolerance;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor2& p = *params[pi];
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            const double saved = p.data[i];
            p.data[i] = saved + h;
            const double plus = loss_fn();
            p.data[i] = saved - h;
            const double minus = loss_fn();
            p.data[i] = saved;
            if (!std::isfinite(plus) || !std::isfinite(minus))
                throw std::runtime_error("grad_check: non-finite loss during perturbation");

            const double numeric = (plus - minus) / (2.0 * h);
            const double a = analytic[pi].data[i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1.0});
            const double rel = std::fabs(a - numeric) / denom;
            if (rel > report.max_discrepancy) {
                report.max_discrepancy = rel;
                report.worst_param = pi;
                report.worst_index = i;
            }
        }
    }
    report.pass = report.max_discrepancy <= tolerance;
    return report;
}

}  // namespace wavehits::nn
