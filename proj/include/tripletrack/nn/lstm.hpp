#pragma once

#include <string>
#include <vector>

#include "tripletrack/nn/param.hpp"
#include "tripletrack/nn/tensor.hpp"

namespace tripletrack::nn {

/// Single LSTM cell. One concatenated weight matrix [(I+H) x 4H] acting on [x, h_prev],
/// gate blocks ordered (input, forget, candidate, output).
class LstmCell {
public:
    LstmCell() = default;
    LstmCell(const std::string& name, std::size_t input_dim, std::size_t hidden_dim);

    /// Weights ~ N(0, stddev^2); biases 0 except the forget block, which starts at `forget_bias`.
    void init(Rng& rng, double stddev = kInitStddev, double forget_bias = 1.0);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t hidden_dim() const { return hidden_dim_; }

    struct State {
        Tensor h;
        Tensor c;
    };

    struct StepCache {
        Tensor xh;     // [B x (I+H)]
        Tensor gates;  // activated gates [B x 4H]
        Tensor c_prev;
        Tensor tanh_c;
    };

    State forward(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev, StepCache* cache = nullptr) const;

    struct InputGrads {
        Tensor x;
        Tensor h_prev;
        Tensor c_prev;
    };

    /// Backward through one step given upstream d(loss)/dh and d(loss)/dc. Accumulates parameter grads.
    InputGrads backward(const StepCache& cache, const Tensor& grad_h, const Tensor& grad_c);

    ParamRefs params() { return {&weight, &bias}; }

    Param weight;
    Param bias;

private:
    std::size_t input_dim_ = 0;
    std::size_t hidden_dim_ = 0;
};

/// Convenience wrapper for the free-function form of a single step.
inline LstmCell::State lstm_cell_forward(const LstmCell& cell, const Tensor& x, const Tensor& h_prev,
                                         const Tensor& c_prev) {
    return cell.forward(x, h_prev, c_prev);
}

/// Unrolled single-layer LSTM over a fixed-length sequence, starting from zero state.
class Lstm {
public:
    struct Cache {
        std::vector<LstmCell::StepCache> steps;
    };

    static Tensor run(const LstmCell& cell, const std::vector<Tensor>& inputs, Cache* cache = nullptr);

    /// Backpropagation through time from the gradient on the final hidden state.
    /// Returns the gradient with respect to every input step.
    static std::vector<Tensor> backward(LstmCell& cell, const Cache& cache, const Tensor& grad_final_h);
};

}  // namespace tripletrack::nn
