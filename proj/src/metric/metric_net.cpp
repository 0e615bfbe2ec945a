#include "tripletrack/metric/metric_net.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "tripletrack/io/numbers.hpp"

namespace tripletrack::metric {

using nn::Tensor;

void ChannelConfig::validate() const {
    if (!appearance && !motion) throw std::invalid_argument("metric: at least one feature channel must be enabled");
}

void MetricNetConfig::validate() const {
    if (embedding_dim <= 0) throw std::invalid_argument("metric: embedding_dim must be positive");
    channels.validate();
}

void MetricTrainConfig::validate() const {
    optimizer.validate();
    if (iterations < 0) throw std::invalid_argument("metric training: iterations must be >= 0");
    if (log_every <= 0) throw std::invalid_argument("metric training: log_every must be positive");
    if (!std::isfinite(triplet.tau)) throw std::invalid_argument("metric training: tau must be finite");
    if (batch.identities_per_batch <= 0 || batch.instances_per_identity <= 0) {
        throw std::invalid_argument("metric training: batch sizes must be positive");
    }
}

BundleBatch stack_bundles(std::span<const sim::TripletBundle* const> bundles, int window) {
    if (bundles.empty()) throw std::invalid_argument("stack_bundles: empty batch");
    const std::size_t dim = bundles.front()->descriptor.size();
    Tensor descriptors = Tensor::matrix(bundles.size(), dim);
    std::vector<const sim::MotionSample*> motions;
    motions.reserve(bundles.size());
    for (std::size_t r = 0; r < bundles.size(); ++r) {
        const auto& d = bundles[r]->descriptor;
        if (d.size() != dim) throw nn::DimensionError("stack_bundles: descriptors of unequal length");
        std::copy(d.begin(), d.end(), descriptors.row(r).begin());
        motions.push_back(&bundles[r]->motion);
    }
    return {std::move(descriptors), motion::stack_motion(motions, window)};
}

TripletChannels stack_triplets(std::span<const sim::TripletInstance> batch, int window) {
    std::vector<const sim::TripletBundle*> a, p, n;
    for (const auto& z : batch) {
        a.push_back(&z.anchor);
        p.push_back(&z.positive);
        n.push_back(&z.negative);
    }
    return {stack_bundles(a, window), stack_bundles(p, window), stack_bundles(n, window)};
}

JointFeatures::JointFeatures(appearance::IdNet id, motion::PredictionNet motion, const ChannelConfig& channels)
    : id_net(std::move(id)), motion_net(std::move(motion)), channels_(channels) {
    channels.validate();
}

std::size_t JointFeatures::width() const {
    std::size_t w = 0;
    if (channels_.appearance) w += static_cast<std::size_t>(id_net.config().feature_dim);
    if (channels_.motion) w += static_cast<std::size_t>(motion_net.config().hidden_dim);
    return w;
}

Tensor JointFeatures::concat(const Tensor& appearance, const Tensor& motion) const {
    const std::size_t a = channels_.appearance ? appearance.cols() : 0;
    const std::size_t m = channels_.motion ? motion.cols() : 0;
    const std::size_t rows = channels_.appearance ? appearance.rows() : motion.rows();
    if (channels_.appearance && channels_.motion && motion.rows() != rows) {
        throw nn::DimensionError("joint features: " + nn::shape_string(appearance.shape()) + " vs " +
                                 nn::shape_string(motion.shape()));
    }
    Tensor out = Tensor::matrix(rows, a + m);
    for (std::size_t r = 0; r < rows; ++r) {
        auto dst = out.row(r);
        if (a) std::copy_n(appearance.row(r).begin(), a, dst.begin());
        if (m) std::copy_n(motion.row(r).begin(), m, dst.begin() + static_cast<std::ptrdiff_t>(a));
    }
    return out;
}

Tensor JointFeatures::forward(const BundleBatch& batch, Cache* cache) const {
    Tensor app, mot;
    if (channels_.appearance) app = id_net.features(batch.descriptors, cache ? &cache->id : nullptr);
    if (channels_.motion) mot = motion_net.features(batch.motion, cache ? &cache->motion : nullptr);
    return concat(app, mot);
}

void JointFeatures::backward(const Cache& cache, const Tensor& grad) {
    const std::size_t rows = grad.rows();
    const std::size_t a = channels_.appearance ? static_cast<std::size_t>(id_net.config().feature_dim) : 0;
    const std::size_t m = channels_.motion ? static_cast<std::size_t>(motion_net.config().hidden_dim) : 0;
    if (grad.cols() != a + m) throw nn::DimensionError("joint features backward: gradient width mismatch");
    if (a) {
        Tensor ga = Tensor::matrix(rows, a);
        for (std::size_t r = 0; r < rows; ++r) std::copy_n(grad.row(r).begin(), a, ga.row(r).begin());
        id_net.backward_features(cache.id, ga);
    }
    if (m) {
        Tensor gm = Tensor::matrix(rows, m);
        for (std::size_t r = 0; r < rows; ++r) {
            std::copy_n(grad.row(r).begin() + static_cast<std::ptrdiff_t>(a), m, gm.row(r).begin());
        }
        motion_net.backward_features(cache.motion, gm);
    }
}

nn::ParamRefs JointFeatures::params() {
    nn::ParamRefs out;
    if (channels_.appearance) {
        auto p = id_net.feature_params();
        out.insert(out.end(), p.begin(), p.end());
    }
    if (channels_.motion) {
        auto p = motion_net.feature_params();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

MetricNet::MetricNet(appearance::IdNet id, motion::PredictionNet motion, const MetricNetConfig& config)
    : joint(std::move(id), std::move(motion), config.channels), config_(config) {
    config.validate();
    fuse = nn::Dense("metric.fuse", joint.width(), static_cast<std::size_t>(config.embedding_dim),
                     nn::Activation::tanh);
}

void MetricNet::init_fuse(Rng& rng, double stddev) { fuse.init(rng, stddev); }

Tensor MetricNet::embed(const BundleBatch& batch, Cache* cache) const {
    return fuse.forward(joint.forward(batch, cache ? &cache->joint : nullptr), cache ? &cache->fuse : nullptr);
}

void MetricNet::backward(const Cache& cache, const Tensor& grad_embedding) {
    joint.backward(cache.joint, fuse.backward(cache.fuse, grad_embedding));
}

Tensor MetricNet::embed_features(const Tensor& joint_features) const { return fuse.forward(joint_features); }

nn::ParamRefs MetricNet::params() {
    auto p = joint.params();
    p.push_back(&fuse.weight);
    p.push_back(&fuse.bias);
    return p;
}

Embedding embed(const MetricNet& net, std::span<const double> descriptor, std::span<const sim::Position> window,
                sim::Position candidate) {
    if (descriptor.size() != static_cast<std::size_t>(net.joint.id_net.config().descriptor_dim)) {
        throw std::invalid_argument("embed: descriptor has " + std::to_string(descriptor.size()) +
                                    " entries, expected " +
                                    std::to_string(net.joint.id_net.config().descriptor_dim));
    }
    if (window.size() != static_cast<std::size_t>(net.joint.window())) {
        throw std::invalid_argument("embed: window has " + std::to_string(window.size()) + " positions, expected " +
                                    std::to_string(net.joint.window()));
    }
    sim::TripletBundle bundle{{descriptor.begin(), descriptor.end()}, {{window.begin(), window.end()}, candidate}};
    const sim::TripletBundle* ptr = &bundle;
    return net.embed(stack_bundles(std::span<const sim::TripletBundle* const>(&ptr, 1), net.joint.window())).storage();
}

namespace {

double satisfied_fraction(const Tensor& a, const Tensor& p, const Tensor& n, const nn::TripletConfig& config) {
    std::size_t ok = 0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        if (nn::triplet_margin_value(a.row(r), p.row(r), n.row(r), config) <= config.tau) ++ok;
    }
    return static_cast<double>(ok) / static_cast<double>(a.rows());
}

}  // namespace

MetricNet train_metric_net(appearance::IdNet id, motion::PredictionNet motion, const sim::TripletSampler& sampler,
                           const MetricNetConfig& config, const MetricTrainConfig& train, Rng& rng,
                           nn::TrainLog* log) {
    config.validate();
    train.validate();
    if (sampler.window() != motion.config().window) {
        throw std::invalid_argument("train_metric_net: sampler window " + std::to_string(sampler.window()) +
                                    " differs from the motion network window " +
                                    std::to_string(motion.config().window));
    }
    if (train.triplet.tau >= 0.0) {
        std::cerr << "warning: triplet margin tau = " << io::format_double(train.triplet.tau)
                  << " is not negative; the margin constraint is then trivially loose\n";
    }
    MetricNet net(std::move(id), std::move(motion), config);
    net.init_fuse(rng);
    auto params = net.params();
    nn::zero_grads(params);

    double loss_sum = 0.0, satisfied_sum = 0.0;
    int count = 0;
    for (int it = 0; it < train.iterations; ++it) {
        const auto batch = sampler.sample(train.batch, rng);
        const auto ch = stack_triplets(batch, net.joint.window());
        MetricNet::Cache ca, cp, cn;
        const Tensor ea = net.embed(ch.anchor, &ca);
        const Tensor ep = net.embed(ch.positive, &cp);
        const Tensor en = net.embed(ch.negative, &cn);
        auto loss = nn::triplet_hinge_loss(ea, ep, en, train.triplet);
        if (!std::isfinite(loss.loss)) {
            throw nn::DivergenceError("train_metric_net: non-finite loss at iteration " + std::to_string(it));
        }
        net.backward(ca, loss.grad_anchor);
        net.backward(cp, loss.grad_positive);
        net.backward(cn, loss.grad_negative);
        nn::rmsprop_step(params, train.optimizer, it);

        loss_sum += loss.loss;
        satisfied_sum += satisfied_fraction(ea, ep, en, train.triplet);
        ++count;
        if (log && (it + 1) % train.log_every == 0) {
            log->push_back({it + 1, loss_sum / count, satisfied_sum / count});
            loss_sum = satisfied_sum = 0.0;
            count = 0;
        }
    }
    return net;
}

namespace {

struct Embedded {
    Tensor a, p, n;
};

Embedded embed_triplets(const MetricNet& net, std::span<const sim::TripletInstance> triplets) {
    const auto ch = stack_triplets(triplets, net.joint.window());
    return {net.embed(ch.anchor), net.embed(ch.positive), net.embed(ch.negative)};
}

}  // namespace

double margin_satisfaction(const MetricNet& net, std::span<const sim::TripletInstance> triplets, double tau,
                           nn::TripletForm form) {
    if (triplets.empty()) throw std::invalid_argument("margin_satisfaction: empty triplet set");
    const auto e = embed_triplets(net, triplets);
    nn::TripletConfig config;
    config.tau = tau;
    config.form = form;
    return satisfied_fraction(e.a, e.p, e.n, config);
}

TripletDistances triplet_distances(const MetricNet& net, std::span<const sim::TripletInstance> triplets) {
    TripletDistances out;
    if (triplets.empty()) return out;
    const auto e = embed_triplets(net, triplets);
    for (std::size_t r = 0; r < e.a.rows(); ++r) {
        out.same.push_back(nn::embedding_distance(e.a.row(r), e.p.row(r)));
        out.different.push_back(nn::embedding_distance(e.p.row(r), e.n.row(r)));
    }
    return out;
}

namespace {

int meta_int(const nn::Checkpoint& c, const std::string& key) { return io::parse_int(c.meta_value(key)); }

void require_kind(const nn::Checkpoint& c, const std::string& kind) {
    if (c.kind != kind) throw std::runtime_error("checkpoint holds '" + c.kind + "', expected '" + kind + "'");
}

void put_id_meta(nn::Checkpoint& c, const appearance::IdNetConfig& cfg) {
    c.meta["id.descriptor_dim"] = std::to_string(cfg.descriptor_dim);
    c.meta["id.hidden_dim"] = std::to_string(cfg.hidden_dim);
    c.meta["id.feature_dim"] = std::to_string(cfg.feature_dim);
    c.meta["id.identities"] = std::to_string(cfg.identities);
}

appearance::IdNetConfig id_meta(const nn::Checkpoint& c) {
    return {meta_int(c, "id.descriptor_dim"), meta_int(c, "id.hidden_dim"), meta_int(c, "id.feature_dim"),
            meta_int(c, "id.identities")};
}

void put_motion_meta(nn::Checkpoint& c, const motion::PredictionNetConfig& cfg) {
    c.meta["motion.hidden_dim"] = std::to_string(cfg.hidden_dim);
    c.meta["motion.window"] = std::to_string(cfg.window);
}

motion::PredictionNetConfig motion_meta(const nn::Checkpoint& c) {
    return {meta_int(c, "motion.hidden_dim"), meta_int(c, "motion.window")};
}

}  // namespace

nn::Checkpoint id_net_checkpoint(appearance::IdNet& net) {
    nn::Checkpoint c;
    c.kind = "id_net";
    put_id_meta(c, net.config());
    c.put_params(net.params());
    return c;
}

appearance::IdNet id_net_from_checkpoint(const nn::Checkpoint& checkpoint) {
    require_kind(checkpoint, "id_net");
    appearance::IdNet net(id_meta(checkpoint));
    checkpoint.load_params(net.params());
    return net;
}

nn::Checkpoint prediction_net_checkpoint(motion::PredictionNet& net) {
    nn::Checkpoint c;
    c.kind = "prediction_net";
    put_motion_meta(c, net.config());
    c.put_params(net.params());
    return c;
}

motion::PredictionNet prediction_net_from_checkpoint(const nn::Checkpoint& checkpoint) {
    require_kind(checkpoint, "prediction_net");
    motion::PredictionNet net(motion_meta(checkpoint));
    checkpoint.load_params(net.params());
    return net;
}

nn::Checkpoint metric_checkpoint(MetricNet& net) {
    nn::Checkpoint c;
    c.kind = "metric_net";
    put_id_meta(c, net.joint.id_net.config());
    put_motion_meta(c, net.joint.motion_net.config());
    c.meta["metric.embedding_dim"] = std::to_string(net.config().embedding_dim);
    c.meta["metric.appearance"] = net.config().channels.appearance ? "1" : "0";
    c.meta["metric.motion"] = net.config().channels.motion ? "1" : "0";
    c.put_params(net.joint.id_net.params());
    c.put_params(net.joint.motion_net.params());
    c.put_params(net.fuse.params());
    return c;
}

MetricNet metric_net_from_checkpoint(const nn::Checkpoint& checkpoint) {
    require_kind(checkpoint, "metric_net");
    MetricNetConfig cfg;
    cfg.embedding_dim = meta_int(checkpoint, "metric.embedding_dim");
    cfg.channels.appearance = checkpoint.meta_value("metric.appearance") == "1";
    cfg.channels.motion = checkpoint.meta_value("metric.motion") == "1";
    MetricNet net(appearance::IdNet(id_meta(checkpoint)), motion::PredictionNet(motion_meta(checkpoint)), cfg);
    checkpoint.load_params(net.joint.id_net.params());
    checkpoint.load_params(net.joint.motion_net.params());
    checkpoint.load_params(net.fuse.params());
    return net;
}

}  // namespace tripletrack::metric
