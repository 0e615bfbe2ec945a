#include "tripletrack/motion/prediction_net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tripletrack/nn/losses.hpp"

namespace tripletrack::motion {

using nn::Activation;
using nn::Tensor;

void PredictionNetConfig::validate() const {
    if (hidden_dim <= 0) throw std::invalid_argument("prediction_net: hidden_dim must be positive");
    if (window <= 0) throw std::invalid_argument("prediction_net: window must be positive");
}

MotionBatch stack_motion(std::span<const sim::MotionSample* const> samples, int window) {
    if (samples.empty()) throw std::invalid_argument("stack_motion: empty batch");
    const std::size_t n = samples.size();
    MotionBatch batch{std::vector<Tensor>(static_cast<std::size_t>(window), Tensor::matrix(n, 2)),
                      Tensor::matrix(n, 2)};
    for (std::size_t r = 0; r < n; ++r) {
        const auto& s = *samples[r];
        if (s.window.size() != static_cast<std::size_t>(window)) {
            throw std::invalid_argument("motion window has " + std::to_string(s.window.size()) +
                                        " positions, expected " + std::to_string(window));
        }
        for (std::size_t t = 0; t < s.window.size(); ++t) {
            batch.steps[t](r, 0) = s.window[t].x;
            batch.steps[t](r, 1) = s.window[t].y;
        }
        batch.candidates(r, 0) = s.candidate.x;
        batch.candidates(r, 1) = s.candidate.y;
    }
    return batch;
}

MotionBatch stack_motion(std::span<const sim::MotionSample> samples, int window) {
    std::vector<const sim::MotionSample*> ptrs;
    ptrs.reserve(samples.size());
    for (const auto& s : samples) ptrs.push_back(&s);
    return stack_motion(ptrs, window);
}

PredictionNet::PredictionNet(const PredictionNetConfig& config)
    : lstm("motion.lstm", 2, static_cast<std::size_t>(config.hidden_dim)),
      position("motion.position", 2, static_cast<std::size_t>(config.hidden_dim), Activation::identity),
      top("motion.top", static_cast<std::size_t>(config.hidden_dim), static_cast<std::size_t>(config.hidden_dim),
          Activation::tanh),
      classifier("motion.classifier", static_cast<std::size_t>(config.hidden_dim), 2, Activation::identity),
      config_(config) {
    config.validate();
}

void PredictionNet::init(Rng& rng, double stddev) {
    lstm.init(rng, stddev, 1.0);
    position.init(rng, stddev);
    top.init(rng, stddev);
    classifier.init(rng, stddev);
}

namespace {

Tensor difference(const Tensor& a, const Tensor& b) {
    nn::require_same_shape(a, b, "motion code difference");
    Tensor out = a;
    auto o = out.values();
    auto bv = b.values();
    for (std::size_t k = 0; k < o.size(); ++k) o[k] -= bv[k];
    return out;
}

}  // namespace

Tensor PredictionNet::features(const MotionBatch& batch, Cache* cache) const {
    if (batch.steps.size() != static_cast<std::size_t>(config_.window)) {
        throw std::invalid_argument("prediction_net: window of " + std::to_string(batch.steps.size()) +
                                    " steps, expected " + std::to_string(config_.window));
    }
    const Tensor code_t = nn::Lstm::run(lstm, batch.steps, cache ? &cache->lstm : nullptr);
    const Tensor code_c = position.forward(batch.candidates, cache ? &cache->position : nullptr);
    return top.forward(difference(code_t, code_c), cache ? &cache->top : nullptr);
}

Tensor PredictionNet::logits(const MotionBatch& batch, Cache* cache) const {
    return classifier.forward(features(batch, cache), cache ? &cache->classifier : nullptr);
}

void PredictionNet::backward_features(const Cache& cache, const Tensor& grad_features) {
    const Tensor grad_diff = top.backward(cache.top, grad_features);
    nn::Lstm::backward(lstm, cache.lstm, grad_diff);
    Tensor neg = grad_diff;
    for (auto& v : neg.values()) v = -v;
    position.backward(cache.position, neg);
}

void PredictionNet::backward_logits(const Cache& cache, const Tensor& grad_logits) {
    backward_features(cache, classifier.backward(cache.classifier, grad_logits));
}

Tensor PredictionNet::encode_windows(const std::vector<Tensor>& steps) const { return nn::Lstm::run(lstm, steps); }

Tensor PredictionNet::encode_candidates(const Tensor& candidates) const { return position.forward(candidates); }

Tensor PredictionNet::combine(const Tensor& window_codes, const Tensor& candidate_codes) const {
    return top.forward(difference(window_codes, candidate_codes));
}

nn::ParamRefs PredictionNet::feature_params() {
    return {&lstm.weight, &lstm.bias, &position.weight, &position.bias, &top.weight, &top.bias};
}

nn::ParamRefs PredictionNet::params() {
    auto p = feature_params();
    p.push_back(&classifier.weight);
    p.push_back(&classifier.bias);
    return p;
}

namespace {

MotionBatch single(const PredictionNet& net, std::span<const sim::Position> window, sim::Position candidate) {
    if (window.size() != static_cast<std::size_t>(net.config().window)) {
        throw std::invalid_argument("motion window has " + std::to_string(window.size()) + " positions, expected " +
                                    std::to_string(net.config().window));
    }
    sim::MotionSample s{{window.begin(), window.end()}, candidate};
    const sim::MotionSample* ptr = &s;
    return stack_motion(std::span<const sim::MotionSample* const>(&ptr, 1), net.config().window);
}

}  // namespace

MotionFeature motion_feature(const PredictionNet& net, std::span<const sim::Position> window,
                             sim::Position candidate) {
    return net.features(single(net, window, candidate)).storage();
}

double predict_prob(const PredictionNet& net, std::span<const sim::Position> window, sim::Position candidate) {
    const Tensor p = nn::softmax(net.logits(single(net, window, candidate)));
    return p(0, PredictionNet::kSameClass);
}

void PredictionTrainConfig::validate() const {
    optimizer.validate();
    if (iterations < 0) throw std::invalid_argument("motion training: iterations must be >= 0");
    if (batch_size <= 0) throw std::invalid_argument("motion training: batch_size must be positive");
    if (log_every <= 0) throw std::invalid_argument("motion training: log_every must be positive");
    if (!(init_stddev > 0.0)) throw std::invalid_argument("motion training: init_stddev must be > 0");
    if (!(top_bias_stddev >= 0.0)) throw std::invalid_argument("motion training: top_bias_stddev must be >= 0");
}

double pair_accuracy(const PredictionNet& net, std::span<const sim::MotionPair> pairs) {
    if (pairs.empty()) return 0.0;
    std::size_t correct = 0;
    constexpr std::size_t kChunk = 256;
    std::vector<const sim::MotionSample*> ptrs;
    for (std::size_t start = 0; start < pairs.size(); start += kChunk) {
        const std::size_t end = std::min(pairs.size(), start + kChunk);
        ptrs.clear();
        for (std::size_t k = start; k < end; ++k) ptrs.push_back(&pairs[k].sample);
        const Tensor logits = net.logits(stack_motion(ptrs, net.config().window));
        for (std::size_t k = start; k < end; ++k) {
            const int predicted = logits(k - start, 1) > logits(k - start, 0) ? 1 : 0;
            if (predicted == pairs[k].label) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

PredictionNet train_prediction_net(std::span<const sim::MotionPair> pairs, std::span<const sim::MotionPair> validation,
                                   const PredictionNetConfig& config, const PredictionTrainConfig& train, Rng& rng,
                                   nn::TrainLog* log) {
    config.validate();
    train.validate();
    if (pairs.empty()) throw std::invalid_argument("train_prediction_net: no training pairs");
    PredictionNet net(config);
    net.init(rng, train.init_stddev);
    if (train.top_bias_stddev > 0.0) {
        std::normal_distribution<double> bias(0.0, train.top_bias_stddev);
        for (auto& v : net.top.bias.value.values()) v = bias(rng);
    }
    auto params = net.params();

    std::vector<std::size_t> order(pairs.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t cursor = 0;

    const auto bs = static_cast<std::size_t>(train.batch_size);
    std::vector<const sim::MotionSample*> batch(bs);
    std::vector<int> labels(bs);
    double loss_sum = 0.0;
    int loss_count = 0;
    for (int it = 0; it < train.iterations; ++it) {
        for (std::size_t b = 0; b < bs; ++b) {
            if (cursor == order.size()) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            const auto& pair = pairs[order[cursor++]];
            batch[b] = &pair.sample;
            labels[b] = pair.label;
        }
        PredictionNet::Cache cache;
        const Tensor logits = net.logits(stack_motion(batch, config.window), &cache);
        auto ce = nn::softmax_cross_entropy(logits, labels);
        if (!std::isfinite(ce.loss)) {
            throw nn::DivergenceError("train_prediction_net: non-finite loss at iteration " + std::to_string(it));
        }
        net.backward_logits(cache, ce.grad);
        nn::rmsprop_step(params, train.optimizer, it);
        loss_sum += ce.loss;
        ++loss_count;
        if (log && (it + 1) % train.log_every == 0) {
            log->push_back({it + 1, loss_sum / loss_count,
                            pair_accuracy(net, validation.empty() ? pairs : validation)});
            loss_sum = 0.0;
            loss_count = 0;
        }
    }
    return net;
}

}  // namespace tripletrack::motion
