#include "tripletrack/nn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace tripletrack::nn {

void RmspropConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("rmsprop: learning_rate must be > 0");
    if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("rmsprop: decay must lie in (0, 1)");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("rmsprop: epsilon must be >= 0");
    if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0)) {
        throw std::invalid_argument("rmsprop: lr_decay_factor must lie in (0, 1]");
    }
    if (lr_decay_every <= 0) throw std::invalid_argument("rmsprop: lr_decay_every must be positive");
}

double RmspropConfig::learning_rate_at(std::int64_t iteration) const {
    const auto decays = iteration / lr_decay_every;
    return learning_rate * std::pow(lr_decay_factor, static_cast<double>(decays));
}

void rmsprop_step(const ParamRefs& params, const RmspropConfig& config, std::int64_t iteration) {
    const double lr = config.learning_rate_at(iteration);
    const double rho = config.decay;
    for (auto* p : params) {
        auto value = p->value.values();
        auto grad = p->grad.values();
        auto ms = p->mean_square.values();
        for (std::size_t k = 0; k < value.size(); ++k) {
            const double g = grad[k];
            ms[k] = rho * ms[k] + (1.0 - rho) * g * g;
            if (g != 0.0) value[k] -= lr * g / std::sqrt(ms[k] + config.epsilon);
        }
        p->zero_grad();
    }
}

}  // namespace tripletrack::nn
