#pragma once

#include <span>
#include <vector>

#include "tripletrack/nn/dense.hpp"
#include "tripletrack/nn/optimizer.hpp"
#include "tripletrack/nn/training_log.hpp"

namespace tripletrack::appearance {

/// Layer widths of the identity-classification network. Paper scale is a 4096-wide
/// feature layer over 2551 identities; desk scale works on short descriptors.
struct IdNetConfig {
    int descriptor_dim = 16;
    int hidden_dim = 64;
    int feature_dim = 32;
    int identities = 20;

    void validate() const;
};

/// Descriptor -> tanh hidden -> tanh feature layer -> identity logits.
/// The feature layer output is the appearance feature; the classifier only exists for training.
class IdNet {
public:
    IdNet() = default;
    explicit IdNet(const IdNetConfig& config);

    void init(Rng& rng, double stddev = nn::kInitStddev);

    struct Cache {
        nn::DenseCache hidden;
        nn::DenseCache feature;
        nn::DenseCache classifier;
    };

    /// [B x D] descriptors -> [B x A] penultimate features.
    nn::Tensor features(const nn::Tensor& descriptors, Cache* cache = nullptr) const;
    /// [B x D] descriptors -> [B x Y] logits.
    nn::Tensor logits(const nn::Tensor& descriptors, Cache* cache = nullptr) const;

    void backward_features(const Cache& cache, const nn::Tensor& grad_features);
    void backward_logits(const Cache& cache, const nn::Tensor& grad_logits);

    /// Parameters that influence the features (classifier excluded).
    nn::ParamRefs feature_params();
    nn::ParamRefs params();

    const IdNetConfig& config() const { return config_; }

    nn::Dense hidden;
    nn::Dense feature;
    nn::Dense classifier;

private:
    IdNetConfig config_;
};

using AppearanceFeature = std::vector<double>;

/// Penultimate-layer activations for one descriptor.
AppearanceFeature appearance_feature(const IdNet& net, std::span<const double> descriptor);

struct LabeledDescriptor {
    std::vector<double> descriptor;
    int label = 0;
};

struct IdTrainConfig {
    nn::RmspropConfig optimizer{1e-3, 0.9, 1e-8, 0.9, 1000};
    int iterations = 3000;
    int batch_size = 32;
    int log_every = 100;
    double validation_fraction = 0.2;

    void validate() const;
};

/// Stacks descriptors into a [B x D] tensor.
nn::Tensor stack_descriptors(std::span<const LabeledDescriptor> samples);

double classification_accuracy(const IdNet& net, std::span<const LabeledDescriptor> samples);

/// Trains with softmax cross-entropy and RMSprop. Each log row holds the mean training loss since
/// the previous row and the accuracy on the held-out split.
IdNet train_id_net(std::span<const LabeledDescriptor> samples, const IdNetConfig& config,
                   const IdTrainConfig& train, Rng& rng, nn::TrainLog* log = nullptr);

/// Same identity iff the L2 distance of the unit-normalized features is below `threshold`.
/// Throws std::invalid_argument for a zero feature or mismatched dimensions.
bool verify_pair(std::span<const double> f1, std::span<const double> f2, double threshold = 0.5);

/// L2 distance between unit-normalized features.
double normalized_distance(std::span<const double> f1, std::span<const double> f2);

}  // namespace tripletrack::appearance
