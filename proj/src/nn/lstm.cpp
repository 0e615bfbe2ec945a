#include "tripletrack/nn/lstm.hpp"

#include <cmath>

namespace tripletrack::nn {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

LstmCell::LstmCell(const std::string& name, std::size_t input_dim, std::size_t hidden_dim)
    : weight(name + ".weight", {input_dim + hidden_dim, 4 * hidden_dim}),
      bias(name + ".bias", {4 * hidden_dim}),
      input_dim_(input_dim),
      hidden_dim_(hidden_dim) {}

void LstmCell::init(Rng& rng, double stddev, double forget_bias) {
    weight.init_normal(rng, stddev);
    bias.value.fill(0.0);
    for (std::size_t k = hidden_dim_; k < 2 * hidden_dim_; ++k) bias.value[k] = forget_bias;
}

LstmCell::State LstmCell::forward(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev,
                                  StepCache* cache) const {
    const std::size_t hd = hidden_dim_;
    if (x.rank() != 2 || x.cols() != input_dim_) {
        throw DimensionError("lstm: input " + shape_string(x.shape()) + " expected [B x " +
                             std::to_string(input_dim_) + "]");
    }
    const std::size_t batch = x.rows();
    if (h_prev.shape() != Shape{batch, hd} || c_prev.shape() != Shape{batch, hd}) {
        throw DimensionError("lstm: state " + shape_string(h_prev.shape()) + "/" + shape_string(c_prev.shape()) +
                             " expected [" + std::to_string(batch) + "x" + std::to_string(hd) + "]");
    }

    const std::size_t in = input_dim_ + hd, gw = 4 * hd;
    Tensor xh = Tensor::matrix(batch, in);
    for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t i = 0; i < input_dim_; ++i) xh(r, i) = x(r, i);
        for (std::size_t j = 0; j < hd; ++j) xh(r, input_dim_ + j) = h_prev(r, j);
    }

    Tensor gates = Tensor::matrix(batch, gw);
    const double* w = weight.value.values().data();
    for (std::size_t r = 0; r < batch; ++r) {
        double* z = &gates(r, 0);
        for (std::size_t k = 0; k < gw; ++k) z[k] = bias.value[k];
        for (std::size_t i = 0; i < in; ++i) {
            const double v = xh(r, i);
            if (v == 0.0) continue;
            const double* wi = w + i * gw;
            for (std::size_t k = 0; k < gw; ++k) z[k] += v * wi[k];
        }
        for (std::size_t k = 0; k < 2 * hd; ++k) z[k] = sigmoid(z[k]);
        for (std::size_t k = 2 * hd; k < 3 * hd; ++k) z[k] = std::tanh(z[k]);
        for (std::size_t k = 3 * hd; k < gw; ++k) z[k] = sigmoid(z[k]);
    }

    State state{Tensor::matrix(batch, hd), Tensor::matrix(batch, hd)};
    Tensor tanh_c = Tensor::matrix(batch, hd);
    for (std::size_t r = 0; r < batch; ++r) {
        const double* g = &gates(r, 0);
        for (std::size_t j = 0; j < hd; ++j) {
            const double c = g[hd + j] * c_prev(r, j) + g[j] * g[2 * hd + j];
            state.c(r, j) = c;
            tanh_c(r, j) = std::tanh(c);
            state.h(r, j) = g[3 * hd + j] * tanh_c(r, j);
        }
    }
    if (cache) {
        cache->xh = std::move(xh);
        cache->gates = std::move(gates);
        cache->c_prev = c_prev;
        cache->tanh_c = std::move(tanh_c);
    }
    return state;
}

LstmCell::InputGrads LstmCell::backward(const StepCache& cache, const Tensor& grad_h, const Tensor& grad_c) {
    const std::size_t hd = hidden_dim_, gw = 4 * hd, in = input_dim_ + hd;
    const std::size_t batch = cache.xh.rows();
    require_same_shape(grad_h, cache.tanh_c, "lstm backward dh");
    require_same_shape(grad_c, cache.tanh_c, "lstm backward dc");

    InputGrads out{Tensor::matrix(batch, input_dim_), Tensor::matrix(batch, hd), Tensor::matrix(batch, hd)};
    std::vector<double> dz(gw);
    double* dw = weight.grad.values().data();
    double* db = bias.grad.values().data();
    const double* w = weight.value.values().data();

    for (std::size_t r = 0; r < batch; ++r) {
        const double* g = cache.gates.values().data() + r * gw;
        for (std::size_t j = 0; j < hd; ++j) {
            const double ig = g[j], fg = g[hd + j], cg = g[2 * hd + j], og = g[3 * hd + j];
            const double tc = cache.tanh_c(r, j);
            const double dh = grad_h(r, j);
            const double dc = grad_c(r, j) + dh * og * (1.0 - tc * tc);
            dz[j] = dc * cg * ig * (1.0 - ig);
            dz[hd + j] = dc * cache.c_prev(r, j) * fg * (1.0 - fg);
            dz[2 * hd + j] = dc * ig * (1.0 - cg * cg);
            dz[3 * hd + j] = dh * tc * og * (1.0 - og);
            out.c_prev(r, j) = dc * fg;
        }
        for (std::size_t k = 0; k < gw; ++k) db[k] += dz[k];
        for (std::size_t i = 0; i < in; ++i) {
            const double v = cache.xh(r, i);
            double* dwi = dw + i * gw;
            const double* wi = w + i * gw;
            double acc = 0.0;
            for (std::size_t k = 0; k < gw; ++k) {
                dwi[k] += v * dz[k];
                acc += wi[k] * dz[k];
            }
            if (i < input_dim_) {
                out.x(r, i) = acc;
            } else {
                out.h_prev(r, i - input_dim_) = acc;
            }
        }
    }
    return out;
}

Tensor Lstm::run(const LstmCell& cell, const std::vector<Tensor>& inputs, Cache* cache) {
    if (inputs.empty()) throw DimensionError("lstm: empty input sequence");
    const std::size_t batch = inputs.front().rows();
    LstmCell::State state{Tensor::matrix(batch, cell.hidden_dim()), Tensor::matrix(batch, cell.hidden_dim())};
    if (cache) cache->steps.assign(inputs.size(), {});
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        state = cell.forward(inputs[t], state.h, state.c, cache ? &cache->steps[t] : nullptr);
    }
    return state.h;
}

std::vector<Tensor> Lstm::backward(LstmCell& cell, const Cache& cache, const Tensor& grad_final_h) {
    const std::size_t steps = cache.steps.size();
    std::vector<Tensor> grad_inputs(steps);
    Tensor dh = grad_final_h;
    Tensor dc(grad_final_h.shape());
    for (std::size_t t = steps; t-- > 0;) {
        auto g = cell.backward(cache.steps[t], dh, dc);
        grad_inputs[t] = std::move(g.x);
        dh = std::move(g.h_prev);
        dc = std::move(g.c_prev);
    }
    return grad_inputs;
}

}  // namespace tripletrack::nn
