#include "tripletrack/nn/param.hpp"

namespace tripletrack {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace tripletrack

namespace tripletrack::nn {

Param::Param(std::string name_, Shape shape)
    : name(std::move(name_)), value(shape), grad(shape), mean_square(shape) {}

void Param::init_normal(Rng& rng, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& v : value.values()) v = dist(rng);
}

void zero_grads(const ParamRefs& params) {
    for (auto* p : params) p->zero_grad();
}

}  // namespace tripletrack::nn
