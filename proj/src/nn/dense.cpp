#include "tripletrack/nn/dense.hpp"

#include <cmath>

namespace tripletrack::nn {

namespace {

void check_fc_shapes(const Tensor& input, const Param& weights, const Param& bias) {
    if (input.rank() != 2 || weights.value.rank() != 2 || input.cols() != weights.value.rows()) {
        throw DimensionError("fc: input " + shape_string(input.shape()) + " does not conform to weights " +
                             shape_string(weights.value.shape()));
    }
    if (bias.value.rank() != 1 || bias.value.size() != weights.value.cols()) {
        throw DimensionError("fc: bias " + shape_string(bias.value.shape()) + " does not conform to weights " +
                             shape_string(weights.value.shape()));
    }
}

}  // namespace

Tensor fc_forward(const Tensor& input, const Param& weights, const Param& bias, Activation activation) {
    check_fc_shapes(input, weights, bias);
    const std::size_t batch = input.rows(), in = input.cols(), out = weights.value.cols();
    Tensor result = Tensor::matrix(batch, out);
    const double* w = weights.value.values().data();
    const double* b = bias.value.values().data();
    for (std::size_t r = 0; r < batch; ++r) {
        double* y = &result(r, 0);
        for (std::size_t o = 0; o < out; ++o) y[o] = b[o];
        for (std::size_t i = 0; i < in; ++i) {
            const double x = input(r, i);
            if (x == 0.0) continue;
            const double* wi = w + i * out;
            for (std::size_t o = 0; o < out; ++o) y[o] += x * wi[o];
        }
        switch (activation) {
            case Activation::identity:
                break;
            case Activation::tanh:
                for (std::size_t o = 0; o < out; ++o) y[o] = std::tanh(y[o]);
                break;
            case Activation::relu:
                for (std::size_t o = 0; o < out; ++o) y[o] = y[o] > 0.0 ? y[o] : 0.0;
                break;
        }
    }
    return result;
}

void apply_activation_grad(Activation activation, const Tensor& output, Tensor& grad) {
    require_same_shape(output, grad, "activation grad");
    auto g = grad.values();
    auto y = output.values();
    switch (activation) {
        case Activation::identity:
            break;
        case Activation::tanh:
            for (std::size_t k = 0; k < g.size(); ++k) g[k] *= 1.0 - y[k] * y[k];
            break;
        case Activation::relu:
            for (std::size_t k = 0; k < g.size(); ++k) g[k] = y[k] > 0.0 ? g[k] : 0.0;
            break;
    }
}

Tensor fc_backward(const Tensor& input, const Tensor& output, const Tensor& grad_output, Param& weights,
                   Param& bias, Activation activation) {
    check_fc_shapes(input, weights, bias);
    require_same_shape(output, grad_output, "fc backward");
    Tensor delta = grad_output;
    apply_activation_grad(activation, output, delta);

    const std::size_t batch = input.rows(), in = input.cols(), out = weights.value.cols();
    double* dw = weights.grad.values().data();
    double* db = bias.grad.values().data();
    const double* w = weights.value.values().data();
    Tensor grad_input = Tensor::matrix(batch, in);
    for (std::size_t r = 0; r < batch; ++r) {
        const double* d = &delta(r, 0);
        for (std::size_t o = 0; o < out; ++o) db[o] += d[o];
        for (std::size_t i = 0; i < in; ++i) {
            const double x = input(r, i);
            double* dwi = dw + i * out;
            const double* wi = w + i * out;
            double acc = 0.0;
            for (std::size_t o = 0; o < out; ++o) {
                dwi[o] += x * d[o];
                acc += wi[o] * d[o];
            }
            grad_input(r, i) = acc;
        }
    }
    return grad_input;
}

Dense::Dense(const std::string& name, std::size_t in, std::size_t out, Activation activation_)
    : weight(name + ".weight", {in, out}), bias(name + ".bias", {out}), activation(activation_) {}

void Dense::init(Rng& rng, double stddev) {
    weight.init_normal(rng, stddev);
    bias.value.fill(0.0);
}

Tensor Dense::forward(const Tensor& input, DenseCache* cache) const {
    Tensor out = fc_forward(input, weight, bias, activation);
    if (cache) {
        cache->input = input;
        cache->output = out;
    }
    return out;
}

Tensor Dense::backward(const DenseCache& cache, const Tensor& grad_output) {
    return fc_backward(cache.input, cache.output, grad_output, weight, bias, activation);
}

}  // namespace tripletrack::nn
