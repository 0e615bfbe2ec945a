#pragma once

#include <span>
#include <vector>

#include "tripletrack/appearance/id_net.hpp"
#include "tripletrack/motion/prediction_net.hpp"
#include "tripletrack/nn/checkpoint.hpp"
#include "tripletrack/nn/losses.hpp"
#include "tripletrack/sim/datasets.hpp"

namespace tripletrack::metric {

/// Which feature channels feed the fused representation. Both on is the full model; the
/// single-channel settings are the ablation variants.
struct ChannelConfig {
    bool appearance = true;
    bool motion = true;

    void validate() const;
};

/// Batched network input: [B x D] descriptors plus the motion windows and candidates.
struct BundleBatch {
    nn::Tensor descriptors;
    motion::MotionBatch motion;

    std::size_t size() const { return descriptors.rows(); }
};

BundleBatch stack_bundles(std::span<const sim::TripletBundle* const> bundles, int window);

/// Anchor, positive and negative channels of a triplet batch.
struct TripletChannels {
    BundleBatch anchor;
    BundleBatch positive;
    BundleBatch negative;
};

TripletChannels stack_triplets(std::span<const sim::TripletInstance> batch, int window);

/// The two pretrained component networks and the concatenation of their features.
class JointFeatures {
public:
    JointFeatures() = default;
    JointFeatures(appearance::IdNet id, motion::PredictionNet motion, const ChannelConfig& channels);

    struct Cache {
        appearance::IdNet::Cache id;
        motion::PredictionNet::Cache motion;
    };

    /// [B x width()] = concat(appearance features, motion features) over the enabled channels.
    nn::Tensor forward(const BundleBatch& batch, Cache* cache = nullptr) const;
    void backward(const Cache& cache, const nn::Tensor& grad);

    /// Concatenation of already-computed channel features; a disabled channel may be empty.
    nn::Tensor concat(const nn::Tensor& appearance, const nn::Tensor& motion) const;

    std::size_t width() const;
    int window() const { return motion_net.config().window; }
    const ChannelConfig& channels() const { return channels_; }

    /// Feature parameters of the enabled channels (classifier heads excluded).
    nn::ParamRefs params();

    appearance::IdNet id_net;
    motion::PredictionNet motion_net;

private:
    ChannelConfig channels_;
};

struct MetricNetConfig {
    int embedding_dim = 16;  // paper scale: 256
    ChannelConfig channels;

    void validate() const;
};

using Embedding = std::vector<double>;

/// Shared-weight embedding network: tanh FC over the joint features. The anchor, positive and
/// negative channels are three evaluations of this one object.
class MetricNet {
public:
    MetricNet() = default;
    MetricNet(appearance::IdNet id, motion::PredictionNet motion, const MetricNetConfig& config);

    void init_fuse(Rng& rng, double stddev = nn::kInitStddev);

    struct Cache {
        JointFeatures::Cache joint;
        nn::DenseCache fuse;
    };

    /// [B x K] embeddings.
    nn::Tensor embed(const BundleBatch& batch, Cache* cache = nullptr) const;
    /// Accumulates gradients into the fusion layer and every enabled component parameter.
    void backward(const Cache& cache, const nn::Tensor& grad_embedding);

    /// Embeddings of precomputed joint features.
    nn::Tensor embed_features(const nn::Tensor& joint_features) const;

    nn::ParamRefs params();
    const MetricNetConfig& config() const { return config_; }

    JointFeatures joint;
    nn::Dense fuse;

private:
    MetricNetConfig config_;
};

/// Single-input embedding. Throws std::invalid_argument on dimension mismatches.
Embedding embed(const MetricNet& net, std::span<const double> descriptor, std::span<const sim::Position> window,
                sim::Position candidate);

struct MetricTrainConfig {
    nn::RmspropConfig optimizer{1e-3, 0.9, 1e-8, 0.95, 200};
    int iterations = 1200;
    int log_every = 20;
    nn::TripletConfig triplet;
    sim::TripletBatchSpec batch;

    void validate() const;
};

/// Mean triplet hinge loss over freshly sampled batches; gradients reach the component networks.
/// A non-negative tau only warns (on stderr); a non-finite loss throws nn::DivergenceError.
/// Log rows carry the mean batch loss and the fraction of batch triplets meeting the margin.
MetricNet train_metric_net(appearance::IdNet id, motion::PredictionNet motion, const sim::TripletSampler& sampler,
                           const MetricNetConfig& config, const MetricTrainConfig& train, Rng& rng,
                           nn::TrainLog* log = nullptr);

/// Fraction of triplets with d(a,p) - d(second) <= tau, the second distance chosen by `form`.
/// Throws std::invalid_argument on an empty set.
double margin_satisfaction(const MetricNet& net, std::span<const sim::TripletInstance> triplets, double tau,
                           nn::TripletForm form = nn::TripletForm::positive_negative);

/// Anchor-positive and positive-negative embedding distances of each triplet.
struct TripletDistances {
    std::vector<double> same;
    std::vector<double> different;
};

TripletDistances triplet_distances(const MetricNet& net, std::span<const sim::TripletInstance> triplets);

/// Checkpoint of all component parameters plus the fusion layer and the network shape.
nn::Checkpoint metric_checkpoint(MetricNet& net);
MetricNet metric_net_from_checkpoint(const nn::Checkpoint& checkpoint);

nn::Checkpoint id_net_checkpoint(appearance::IdNet& net);
appearance::IdNet id_net_from_checkpoint(const nn::Checkpoint& checkpoint);

nn::Checkpoint prediction_net_checkpoint(motion::PredictionNet& net);
motion::PredictionNet prediction_net_from_checkpoint(const nn::Checkpoint& checkpoint);

}  // namespace tripletrack::metric
