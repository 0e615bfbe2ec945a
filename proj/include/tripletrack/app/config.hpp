#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tripletrack/appearance/id_net.hpp"
#include "tripletrack/assoc/affinity.hpp"
#include "tripletrack/assoc/tracker.hpp"
#include "tripletrack/io/mot_csv.hpp"
#include "tripletrack/metric/metric_net.hpp"
#include "tripletrack/motion/prediction_net.hpp"
#include "tripletrack/sim/simulator.hpp"

namespace tripletrack::app {

/// Synthetic trajectories for Prediction-Net training: groups of nearby starts so that the
/// "other trajectory at the same frame" negatives are spatially close.
struct MotionDataConfig {
    int groups = 250;
    int group_size = 8;
    int length = 20;  // frames per sampled trajectory
    double group_radius = 0.05;
    double jitter = 0.001;
    int validation_groups = 25;
};

/// balanced: the cost threshold with the best mean of same-pair and different-pair accuracy.
/// percentile: the gate_percentile quantile of same-pair costs. fixed: the configured constant.
enum class GateRule { balanced, percentile, fixed };

struct TrackerSettings {
    assoc::TrackerConfig lifecycle;
    assoc::EmbeddingGate gate;
    /// How the maximum pair cost is chosen, for the embedding distance and for the verification
    /// cost 1 - P(same) alike. Calibrated rules use held-out triplets of the validation scene.
    GateRule gate_rule = GateRule::balanced;
    double gate_percentile = 0.95;
    /// Fixed-rule gates: gate.gate for embeddings, this for the verification cost.
    double verification_gate = 0.5;
    double baseline_min_iou = 0.3;
};

struct EvaluationConfig {
    double iou_threshold = 0.5;
    int held_out_batches = 10;
    int verification_positive_pairs = 2000;
    int verification_negative_pairs = 4000;
    double verification_threshold = 0.5;
    int seeds = 5;
    int sweep_min_window = 1;
    int sweep_max_window = 8;
};

/// Every knob of a run. Scene seeds are derived from `seed`: the three scenes (train,
/// validation, test) share one identity population and differ in trajectories and noise.
struct RunConfig {
    std::uint64_t seed = 1;
    sim::SceneConfig scene;
    io::ImageSize image;
    appearance::IdNetConfig id;
    appearance::IdTrainConfig id_train;
    motion::PredictionNetConfig motion;
    motion::PredictionTrainConfig motion_train;
    MotionDataConfig motion_data;
    metric::MetricNetConfig metric;
    metric::MetricTrainConfig metric_train;
    int verification_hidden = 16;
    TrackerSettings tracker;
    EvaluationConfig evaluation;

    /// Throws std::invalid_argument with the offending key and the accepted range.
    void validate() const;
};

/// Parses `[section]` / `key = value` text. Unknown sections or keys and malformed values raise
/// std::invalid_argument naming the key. Missing keys keep their defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its current value, in a form parse_config reads back to the same configuration.
std::string config_to_ini(const RunConfig& config);

/// Dotted names of all accepted keys.
std::vector<std::string> config_keys();

}  // namespace tripletrack::app
