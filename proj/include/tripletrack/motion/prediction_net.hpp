#pragma once

#include <span>
#include <vector>

#include "tripletrack/nn/dense.hpp"
#include "tripletrack/nn/lstm.hpp"
#include "tripletrack/nn/optimizer.hpp"
#include "tripletrack/nn/training_log.hpp"
#include "tripletrack/sim/datasets.hpp"

namespace tripletrack::motion {

/// Paper scale: 300 hidden units, window 6. Desk default keeps the window and shrinks H.
struct PredictionNetConfig {
    int hidden_dim = 32;
    int window = 6;

    void validate() const;
};

/// Batched motion input: `window` steps of [B x 2] positions and [B x 2] candidates.
struct MotionBatch {
    std::vector<nn::Tensor> steps;
    nn::Tensor candidates;

    std::size_t size() const { return candidates.rows(); }
};

/// Throws std::invalid_argument if any window length differs from `window`.
MotionBatch stack_motion(std::span<const sim::MotionSample* const> samples, int window);
MotionBatch stack_motion(std::span<const sim::MotionSample> samples, int window);

/// LSTM over the window; the candidate goes through its own FC layer; the difference of the two
/// H-dimensional codes feeds a tanh FC layer (the motion feature) and a 2-way classifier.
class PredictionNet {
public:
    static constexpr int kSameClass = 1;

    PredictionNet() = default;
    explicit PredictionNet(const PredictionNetConfig& config);

    void init(Rng& rng, double stddev = nn::kInitStddev);

    struct Cache {
        nn::Lstm::Cache lstm;
        nn::DenseCache position;
        nn::DenseCache top;
        nn::DenseCache classifier;
    };

    nn::Tensor features(const MotionBatch& batch, Cache* cache = nullptr) const;
    nn::Tensor logits(const MotionBatch& batch, Cache* cache = nullptr) const;

    void backward_features(const Cache& cache, const nn::Tensor& grad_features);
    void backward_logits(const Cache& cache, const nn::Tensor& grad_logits);

    /// Split evaluation for the tracker: window codes are shared across candidates.
    nn::Tensor encode_windows(const std::vector<nn::Tensor>& steps) const;
    nn::Tensor encode_candidates(const nn::Tensor& candidates) const;
    nn::Tensor combine(const nn::Tensor& window_codes, const nn::Tensor& candidate_codes) const;

    nn::ParamRefs feature_params();
    nn::ParamRefs params();

    const PredictionNetConfig& config() const { return config_; }

    nn::LstmCell lstm;
    nn::Dense position;
    nn::Dense top;
    nn::Dense classifier;

private:
    PredictionNetConfig config_;
};

using MotionFeature = std::vector<double>;

MotionFeature motion_feature(const PredictionNet& net, std::span<const sim::Position> window,
                             sim::Position candidate);

/// Probability that `candidate` continues `window`.
double predict_prob(const PredictionNet& net, std::span<const sim::Position> window, sim::Position candidate);

struct PredictionTrainConfig {
    nn::RmspropConfig optimizer{3e-3, 0.9, 1e-8, 0.95, 1000};
    int iterations = 6000;
    int batch_size = 10;
    int log_every = 200;
    /// The 0.01 paper initialization leaves the difference head on a symmetric saddle at desk
    /// scale (tanh is odd, so zero biases cannot express "near vs far"); see README.
    double init_stddev = 0.3;
    double top_bias_stddev = 1.0;

    void validate() const;
};

double pair_accuracy(const PredictionNet& net, std::span<const sim::MotionPair> pairs);

/// Softmax cross-entropy on labeled pairs with RMSprop. Log rows: mean loss since the previous
/// row and the accuracy on `validation` (training pairs when `validation` is empty).
PredictionNet train_prediction_net(std::span<const sim::MotionPair> pairs, std::span<const sim::MotionPair> validation,
                                   const PredictionNetConfig& config, const PredictionTrainConfig& train, Rng& rng,
                                   nn::TrainLog* log = nullptr);

}  // namespace tripletrack::motion
