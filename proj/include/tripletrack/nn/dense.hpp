#pragma once

#include <string>

#include "tripletrack/nn/param.hpp"
#include "tripletrack/nn/tensor.hpp"

namespace tripletrack::nn {

enum class Activation { identity, tanh, relu };

/// act(input · weights + bias) for input [B x I], weights [I x O], bias [O].
Tensor fc_forward(const Tensor& input, const Param& weights, const Param& bias, Activation activation);

/// Backward pass of fc_forward. `output` is the post-activation result of the forward call.
/// Accumulates into weights.grad / bias.grad and returns d(loss)/d(input).
Tensor fc_backward(const Tensor& input, const Tensor& output, const Tensor& grad_output, Param& weights,
                   Param& bias, Activation activation);

/// In-place derivative of the activation, expressed through its output.
void apply_activation_grad(Activation activation, const Tensor& output, Tensor& grad);

struct DenseCache {
    Tensor input;
    Tensor output;
};

/// Fully connected layer.
class Dense {
public:
    Dense() = default;
    Dense(const std::string& name, std::size_t in, std::size_t out, Activation activation);

    /// Weights ~ N(0, stddev^2), bias = 0.
    void init(Rng& rng, double stddev = kInitStddev);

    Tensor forward(const Tensor& input, DenseCache* cache = nullptr) const;
    Tensor backward(const DenseCache& cache, const Tensor& grad_output);

    std::size_t in_dim() const { return weight.value.shape()[0]; }
    std::size_t out_dim() const { return weight.value.shape()[1]; }

    ParamRefs params() { return {&weight, &bias}; }

    Param weight;
    Param bias;
    Activation activation = Activation::identity;
};

}  // namespace tripletrack::nn
