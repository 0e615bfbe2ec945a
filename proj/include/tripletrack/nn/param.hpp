#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tripletrack/nn/tensor.hpp"

namespace tripletrack {

/// The single generator type threaded through every sampling and initialization call.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent child seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace tripletrack

namespace tripletrack::nn {

/// Trainable tensor with its gradient accumulator and RMSprop mean-square slot.
struct Param {
    Param() = default;
    Param(std::string name, Shape shape);

    std::string name;
    Tensor value;
    Tensor grad;
    Tensor mean_square;

    void zero_grad() { grad.fill(0.0); }
    /// Zero-mean Gaussian initialization.
    void init_normal(Rng& rng, double stddev);
};

using ParamRefs = std::vector<Param*>;

void zero_grads(const ParamRefs& params);

/// Standard deviation of the zero-mean Gaussian weight initialization.
inline constexpr double kInitStddev = 0.01;

}  // namespace tripletrack::nn
