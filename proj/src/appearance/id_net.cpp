#include "tripletrack/appearance/id_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "tripletrack/nn/losses.hpp"

namespace tripletrack::appearance {

using nn::Activation;
using nn::Tensor;

void IdNetConfig::validate() const {
    if (descriptor_dim <= 0 || hidden_dim <= 0 || feature_dim <= 0) {
        throw std::invalid_argument("id_net: layer widths must be positive");
    }
    if (identities < 2) throw std::invalid_argument("id_net: need at least 2 identities");
}

IdNet::IdNet(const IdNetConfig& config)
    : hidden("id.hidden", static_cast<std::size_t>(config.descriptor_dim), static_cast<std::size_t>(config.hidden_dim),
             Activation::tanh),
      feature("id.feature", static_cast<std::size_t>(config.hidden_dim), static_cast<std::size_t>(config.feature_dim),
              Activation::tanh),
      classifier("id.classifier", static_cast<std::size_t>(config.feature_dim),
                 static_cast<std::size_t>(config.identities), Activation::identity),
      config_(config) {
    config.validate();
}

void IdNet::init(Rng& rng, double stddev) {
    hidden.init(rng, stddev);
    feature.init(rng, stddev);
    classifier.init(rng, stddev);
}

Tensor IdNet::features(const Tensor& descriptors, Cache* cache) const {
    if (descriptors.rank() != 2 || descriptors.cols() != static_cast<std::size_t>(config_.descriptor_dim)) {
        throw nn::DimensionError("id_net: descriptors " + nn::shape_string(descriptors.shape()) + " expected [B x " +
                                 std::to_string(config_.descriptor_dim) + "]");
    }
    Tensor h = hidden.forward(descriptors, cache ? &cache->hidden : nullptr);
    return feature.forward(h, cache ? &cache->feature : nullptr);
}

Tensor IdNet::logits(const Tensor& descriptors, Cache* cache) const {
    return classifier.forward(features(descriptors, cache), cache ? &cache->classifier : nullptr);
}

void IdNet::backward_features(const Cache& cache, const Tensor& grad_features) {
    Tensor g = feature.backward(cache.feature, grad_features);
    hidden.backward(cache.hidden, g);
}

void IdNet::backward_logits(const Cache& cache, const Tensor& grad_logits) {
    backward_features(cache, classifier.backward(cache.classifier, grad_logits));
}

nn::ParamRefs IdNet::feature_params() { return {&hidden.weight, &hidden.bias, &feature.weight, &feature.bias}; }

nn::ParamRefs IdNet::params() {
    auto p = feature_params();
    p.push_back(&classifier.weight);
    p.push_back(&classifier.bias);
    return p;
}

AppearanceFeature appearance_feature(const IdNet& net, std::span<const double> descriptor) {
    if (descriptor.size() != static_cast<std::size_t>(net.config().descriptor_dim)) {
        throw nn::DimensionError("appearance_feature: descriptor has " + std::to_string(descriptor.size()) +
                                 " entries, network expects " + std::to_string(net.config().descriptor_dim));
    }
    Tensor in({1, descriptor.size()}, std::vector<double>(descriptor.begin(), descriptor.end()));
    return net.features(in).storage();
}

void IdTrainConfig::validate() const {
    optimizer.validate();
    if (iterations < 0) throw std::invalid_argument("id training: iterations must be >= 0");
    if (batch_size <= 0) throw std::invalid_argument("id training: batch_size must be positive");
    if (log_every <= 0) throw std::invalid_argument("id training: log_every must be positive");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw std::invalid_argument("id training: validation_fraction must lie in [0, 1)");
    }
}

Tensor stack_descriptors(std::span<const LabeledDescriptor> samples) {
    if (samples.empty()) throw std::invalid_argument("stack_descriptors: no samples");
    const std::size_t dim = samples.front().descriptor.size();
    Tensor out = Tensor::matrix(samples.size(), dim);
    for (std::size_t r = 0; r < samples.size(); ++r) {
        if (samples[r].descriptor.size() != dim) throw nn::DimensionError("stack_descriptors: ragged descriptors");
        std::copy(samples[r].descriptor.begin(), samples[r].descriptor.end(), out.row(r).begin());
    }
    return out;
}

double classification_accuracy(const IdNet& net, std::span<const LabeledDescriptor> samples) {
    if (samples.empty()) return 0.0;
    const Tensor logits = net.logits(stack_descriptors(samples));
    std::size_t correct = 0;
    for (std::size_t r = 0; r < samples.size(); ++r) {
        auto row = logits.row(r);
        const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
        if (best == samples[r].label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

IdNet train_id_net(std::span<const LabeledDescriptor> samples, const IdNetConfig& config, const IdTrainConfig& train,
                   Rng& rng, nn::TrainLog* log) {
    config.validate();
    train.validate();
    std::set<int> labels;
    for (const auto& s : samples) {
        if (s.label < 0 || s.label >= config.identities) {
            throw std::out_of_range("train_id_net: label " + std::to_string(s.label) + " outside [0, " +
                                    std::to_string(config.identities) + ")");
        }
        labels.insert(s.label);
    }
    if (labels.size() < 2) throw std::invalid_argument("train_id_net: training data covers fewer than 2 identities");

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_val = static_cast<std::size_t>(train.validation_fraction * static_cast<double>(samples.size()));
    std::vector<LabeledDescriptor> validation, training;
    for (std::size_t k = 0; k < order.size(); ++k) {
        (k < n_val ? validation : training).push_back(samples[order[k]]);
    }

    IdNet net(config);
    net.init(rng);
    auto params = net.params();
    std::uniform_int_distribution<std::size_t> pick(0, training.size() - 1);
    std::vector<LabeledDescriptor> batch(static_cast<std::size_t>(train.batch_size));
    std::vector<int> batch_labels(batch.size());
    double loss_sum = 0.0;
    int loss_count = 0;
    for (int it = 0; it < train.iterations; ++it) {
        for (std::size_t b = 0; b < batch.size(); ++b) {
            batch[b] = training[pick(rng)];
            batch_labels[b] = batch[b].label;
        }
        IdNet::Cache cache;
        const Tensor logits = net.logits(stack_descriptors(batch), &cache);
        auto ce = nn::softmax_cross_entropy(logits, batch_labels);
        if (!std::isfinite(ce.loss)) {
            throw nn::DivergenceError("train_id_net: non-finite loss at iteration " + std::to_string(it));
        }
        net.backward_logits(cache, ce.grad);
        nn::rmsprop_step(params, train.optimizer, it);
        loss_sum += ce.loss;
        ++loss_count;
        if (log && (it + 1) % train.log_every == 0) {
            const auto& eval_set = validation.empty() ? training : validation;
            log->push_back({it + 1, loss_sum / loss_count, classification_accuracy(net, eval_set)});
            loss_sum = 0.0;
            loss_count = 0;
        }
    }
    return net;
}

double normalized_distance(std::span<const double> f1, std::span<const double> f2) {
    if (f1.size() != f2.size()) throw nn::DimensionError("verify_pair: feature dimensions differ");
    double n1 = 0.0, n2 = 0.0;
    for (std::size_t k = 0; k < f1.size(); ++k) {
        n1 += f1[k] * f1[k];
        n2 += f2[k] * f2[k];
    }
    if (n1 == 0.0 || n2 == 0.0) throw std::invalid_argument("verify_pair: cannot normalize a zero feature");
    n1 = std::sqrt(n1);
    n2 = std::sqrt(n2);
    double sq = 0.0;
    for (std::size_t k = 0; k < f1.size(); ++k) {
        const double d = f1[k] / n1 - f2[k] / n2;
        sq += d * d;
    }
    return std::sqrt(sq);
}

bool verify_pair(std::span<const double> f1, std::span<const double> f2, double threshold) {
    return normalized_distance(f1, f2) < threshold;
}

}  // namespace tripletrack::appearance
