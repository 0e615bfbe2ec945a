#pragma once

#include "tripletrack/metric/metric_net.hpp"

namespace tripletrack::metric {

struct VerificationNetConfig {
    int hidden_dim = 16;
    ChannelConfig channels;

    void validate() const;
};

/// Binary same/different head on a pair of joint features: the elementwise squared difference
/// goes through a tanh FC layer and a 2-way classifier. Stand-in for the verification loss in
/// the ablation; the component networks are fine-tuned through it exactly as with the triplet loss.
class VerificationNet {
public:
    static constexpr int kSameClass = 1;

    VerificationNet() = default;
    VerificationNet(appearance::IdNet id, motion::PredictionNet motion, const VerificationNetConfig& config);

    void init_head(Rng& rng, double stddev = nn::kInitStddev);

    struct HeadCache {
        nn::Tensor first;
        nn::Tensor second;
        nn::DenseCache hidden;
        nn::DenseCache classifier;
    };

    /// [B x 2] logits for rows of two [B x F] joint-feature tensors.
    nn::Tensor head_logits(const nn::Tensor& first, const nn::Tensor& second, HeadCache* cache = nullptr) const;

    struct PairGrads {
        nn::Tensor first;
        nn::Tensor second;
    };

    /// Accumulates head gradients; returns the gradients of both feature inputs.
    PairGrads head_backward(const HeadCache& cache, const nn::Tensor& grad_logits);

    /// Probability that each row pair shows the same identity.
    std::vector<double> same_probability(const nn::Tensor& first, const nn::Tensor& second) const;

    nn::ParamRefs params();
    const VerificationNetConfig& config() const { return config_; }

    JointFeatures joint;
    nn::Dense hidden;
    nn::Dense classifier;

private:
    VerificationNetConfig config_;
};

/// Each sampled triplet batch yields (anchor, positive) pairs labeled same and (positive, negative)
/// pairs labeled different; softmax cross-entropy, RMSprop. Log rows: mean loss, pair accuracy.
VerificationNet train_verification_net(appearance::IdNet id, motion::PredictionNet motion,
                                       const sim::TripletSampler& sampler, const VerificationNetConfig& config,
                                       const MetricTrainConfig& train, Rng& rng, nn::TrainLog* log = nullptr);

}  // namespace tripletrack::metric
