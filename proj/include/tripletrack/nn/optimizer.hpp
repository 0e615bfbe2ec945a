#pragma once

#include <cstdint>

#include "tripletrack/nn/param.hpp"

namespace tripletrack::nn {

struct RmspropConfig {
    double learning_rate = 3e-4;
    double decay = 0.9;  // rho
    double epsilon = 1e-8;
    double lr_decay_factor = 0.95;
    std::int64_t lr_decay_every = 20000;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    /// Piecewise-constant schedule: lr0 * factor^floor(iteration / every).
    double learning_rate_at(std::int64_t iteration) const;
};

/// One RMSprop update over every parameter, then zeroes the gradients.
///   ms <- rho*ms + (1-rho)*g^2 ;  value <- value - lr(iteration) * g / sqrt(ms + eps)
void rmsprop_step(const ParamRefs& params, const RmspropConfig& config, std::int64_t iteration);

}  // namespace tripletrack::nn
