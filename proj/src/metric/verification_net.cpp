#include "tripletrack/metric/verification_net.hpp"

#include <cmath>
#include <stdexcept>

namespace tripletrack::metric {

using nn::Tensor;

void VerificationNetConfig::validate() const {
    if (hidden_dim <= 0) throw std::invalid_argument("verification: hidden_dim must be positive");
    channels.validate();
}

VerificationNet::VerificationNet(appearance::IdNet id, motion::PredictionNet motion,
                                 const VerificationNetConfig& config)
    : joint(std::move(id), std::move(motion), config.channels), config_(config) {
    config.validate();
    hidden = nn::Dense("verification.hidden", joint.width(), static_cast<std::size_t>(config.hidden_dim),
                       nn::Activation::tanh);
    classifier = nn::Dense("verification.classifier", static_cast<std::size_t>(config.hidden_dim), 2,
                           nn::Activation::identity);
}

void VerificationNet::init_head(Rng& rng, double stddev) {
    hidden.init(rng, stddev);
    classifier.init(rng, stddev);
}

Tensor VerificationNet::head_logits(const Tensor& first, const Tensor& second, HeadCache* cache) const {
    nn::require_same_shape(first, second, "verification pair");
    Tensor sq = first;
    auto s = sq.values();
    auto b = second.values();
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double d = s[k] - b[k];
        s[k] = d * d;
    }
    if (cache) {
        cache->first = first;
        cache->second = second;
    }
    const Tensor h = hidden.forward(sq, cache ? &cache->hidden : nullptr);
    return classifier.forward(h, cache ? &cache->classifier : nullptr);
}

VerificationNet::PairGrads VerificationNet::head_backward(const HeadCache& cache, const Tensor& grad_logits) {
    const Tensor grad_sq = hidden.backward(cache.hidden, classifier.backward(cache.classifier, grad_logits));
    PairGrads out{grad_sq, grad_sq};
    auto g1 = out.first.values();
    auto g2 = out.second.values();
    auto f1 = cache.first.values();
    auto f2 = cache.second.values();
    for (std::size_t k = 0; k < g1.size(); ++k) {
        g1[k] *= 2.0 * (f1[k] - f2[k]);
        g2[k] = -g1[k];
    }
    return out;
}

std::vector<double> VerificationNet::same_probability(const Tensor& first, const Tensor& second) const {
    const Tensor p = nn::softmax(head_logits(first, second));
    std::vector<double> out(p.rows());
    for (std::size_t r = 0; r < p.rows(); ++r) out[r] = p(r, kSameClass);
    return out;
}

nn::ParamRefs VerificationNet::params() {
    auto p = joint.params();
    for (auto* q : hidden.params()) p.push_back(q);
    for (auto* q : classifier.params()) p.push_back(q);
    return p;
}

namespace {

Tensor stack_rows(const Tensor& top, const Tensor& bottom) {
    Tensor out = Tensor::matrix(top.rows() + bottom.rows(), top.cols());
    std::copy(top.values().begin(), top.values().end(), out.values().begin());
    std::copy(bottom.values().begin(), bottom.values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(top.size()));
    return out;
}

Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t count) {
    Tensor out = Tensor::matrix(count, t.cols());
    const auto src = t.values().subspan(begin * t.cols(), count * t.cols());
    std::copy(src.begin(), src.end(), out.values().begin());
    return out;
}

void add_into(Tensor& dst, const Tensor& src) {
    auto d = dst.values();
    auto s = src.values();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += s[k];
}

}  // namespace

VerificationNet train_verification_net(appearance::IdNet id, motion::PredictionNet motion,
                                       const sim::TripletSampler& sampler, const VerificationNetConfig& config,
                                       const MetricTrainConfig& train, Rng& rng, nn::TrainLog* log) {
    config.validate();
    train.validate();
    if (sampler.window() != motion.config().window) {
        throw std::invalid_argument("train_verification_net: sampler window differs from the motion network window");
    }
    VerificationNet net(std::move(id), std::move(motion), config);
    net.init_head(rng);
    auto params = net.params();
    nn::zero_grads(params);

    double loss_sum = 0.0, acc_sum = 0.0;
    int count = 0;
    std::vector<int> labels;
    for (int it = 0; it < train.iterations; ++it) {
        const auto batch = sampler.sample(train.batch, rng);
        const auto ch = stack_triplets(batch, net.joint.window());
        JointFeatures::Cache ca, cp, cn;
        const Tensor fa = net.joint.forward(ch.anchor, &ca);
        const Tensor fp = net.joint.forward(ch.positive, &cp);
        const Tensor fn = net.joint.forward(ch.negative, &cn);
        const std::size_t b = fa.rows();
        labels.assign(2 * b, 0);
        std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(b), VerificationNet::kSameClass);

        VerificationNet::HeadCache hc;
        const Tensor logits = net.head_logits(stack_rows(fa, fp), stack_rows(fp, fn), &hc);
        auto ce = nn::softmax_cross_entropy(logits, labels);
        if (!std::isfinite(ce.loss)) {
            throw nn::DivergenceError("train_verification_net: non-finite loss at iteration " + std::to_string(it));
        }
        const auto g = net.head_backward(hc, ce.grad);
        Tensor grad_p = slice_rows(g.second, 0, b);
        add_into(grad_p, slice_rows(g.first, b, b));
        net.joint.backward(ca, slice_rows(g.first, 0, b));
        net.joint.backward(cp, grad_p);
        net.joint.backward(cn, slice_rows(g.second, b, b));
        nn::rmsprop_step(params, train.optimizer, it);

        std::size_t correct = 0;
        for (std::size_t r = 0; r < 2 * b; ++r) {
            const int predicted = logits(r, 1) > logits(r, 0) ? 1 : 0;
            if (predicted == labels[r]) ++correct;
        }
        loss_sum += ce.loss;
        acc_sum += static_cast<double>(correct) / static_cast<double>(2 * b);
        ++count;
        if (log && (it + 1) % train.log_every == 0) {
            log->push_back({it + 1, loss_sum / count, acc_sum / count});
            loss_sum = acc_sum = 0.0;
            count = 0;
        }
    }
    return net;
}

}  // namespace tripletrack::metric
