#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tripletrack/app/config.hpp"
#include "tripletrack/eval/clear_mot.hpp"
#include "tripletrack/metric/verification_net.hpp"

namespace tripletrack::app {

enum class Split { train, validation, test };

/// The scene of one split: shared identity population (seeded by the run seed), split-specific
/// trajectories and noise.
sim::SceneConfig scene_config(const RunConfig& config, Split split);
sim::Scene make_scene(const RunConfig& config, Split split);

/// Independent generator for one pipeline stage.
enum class Stage : std::uint64_t {
    id_training = 11,
    motion_data = 12,
    motion_training = 13,
    metric_training = 14,
    held_out = 15,
    verification_pairs = 16,
};
Rng stage_rng(const RunConfig& config, Stage stage);

/// True detections of a scene labeled with their identity.
std::vector<appearance::LabeledDescriptor> labeled_descriptors(const sim::Scene& scene);

appearance::IdNet train_id_stage(const RunConfig& config, const sim::Scene& train_scene, nn::TrainLog* log = nullptr);

struct MotionData {
    std::vector<sim::MotionPair> train;
    std::vector<sim::MotionPair> validation;
};
/// Grouped synthetic trajectories cut into windows of `config.motion.window`. The trajectories do
/// not depend on the window, so a window sweep sees the same motion.
MotionData motion_data(const RunConfig& config);
motion::PredictionNet train_motion_stage(const RunConfig& config, nn::TrainLog* log = nullptr);

metric::MetricNet train_metric_stage(const RunConfig& config, const appearance::IdNet& id,
                                     const motion::PredictionNet& motion, const sim::Scene& train_scene,
                                     nn::TrainLog* log = nullptr);
metric::VerificationNet train_verification_stage(const RunConfig& config, const appearance::IdNet& id,
                                                 const motion::PredictionNet& motion, const sim::Scene& train_scene,
                                                 nn::TrainLog* log = nullptr);

/// evaluation.held_out_batches triplet batches drawn from `scene` (normally the validation split).
std::vector<sim::TripletInstance> held_out_triplets(const RunConfig& config, const sim::Scene& scene);

/// Cost threshold t maximizing the mean of P(same cost <= t) and P(different cost > t); halfway
/// between the two neighbouring costs. Throws std::invalid_argument when either set is empty.
double balanced_threshold(std::span<const double> same, std::span<const double> different);

/// 1 - P(same) of the anchor-positive (same) and positive-negative (different) pairs of each triplet.
metric::TripletDistances verification_costs(const metric::VerificationNet& net,
                                            std::span<const sim::TripletInstance> triplets);

/// Gate under config.tracker.gate_rule for held-out pair costs; `fixed` under the fixed rule.
double calibrate_gate(const TrackerSettings& tracker, const metric::TripletDistances& costs, double fixed);

/// Fraction of correctly decided pairs under the unit-normalized L2 threshold rule, over
/// positive and negative detection pairs of `scene`.
double verification_accuracy(const RunConfig& config, const appearance::IdNet& id, const sim::Scene& scene);

assoc::TrackingResult track_scene(const RunConfig& config, const sim::Scene& scene,
                                  const assoc::AffinityModel& affinity);
eval::MotReport evaluate_scene(const RunConfig& config, const sim::Scene& scene,
                               std::span<const assoc::TrackRow> rows);

/// Gates in effect: calibrated on the validation split or the configured constants.
assoc::EmbeddingGate embedding_gate(const RunConfig& config, const metric::MetricNet& net,
                                    const sim::Scene& validation_scene);
assoc::EmbeddingGate verification_gate(const RunConfig& config, const metric::VerificationNet& net,
                                       const sim::Scene& validation_scene);

struct AblationVariant {
    std::string name;
    bool appearance = true;
    bool motion = true;
    bool triplet = true;  // false: verification head
};

/// A+T, M+T, A+M+T, A+V, M+V, A+M+V.
const std::vector<AblationVariant>& ablation_variants();

/// All trained artifacts and measurements of the default pipeline for one seed.
struct SeedRun {
    std::uint64_t seed = 0;
    double id_validation_accuracy = 0.0;
    double verification_accuracy = 0.0;
    double motion_validation_accuracy = 0.0;
    double margin_satisfaction = 0.0;
    double metric_initial_loss = 0.0;
    double metric_final_loss = 0.0;
    double gate = 0.0;
    eval::MotReport learned;
    eval::MotReport baseline;
};

/// Lazily trains and caches the networks of one seed so sweeps reuse them.
class SeedPipeline {
public:
    explicit SeedPipeline(RunConfig config);

    const RunConfig& config() const { return config_; }
    const sim::Scene& scene(Split split);
    const appearance::IdNet& id_net();
    const motion::PredictionNet& motion_net(int window);
    const metric::MetricNet& metric_net(int window);
    const std::vector<sim::TripletInstance>& held_out(int window);

    SeedRun run_default();
    eval::MotReport run_baseline();
    eval::MotReport run_window(int window);
    eval::MotReport run_variant(const AblationVariant& variant);

private:
    RunConfig with_window(int window) const;

    RunConfig config_;
    std::optional<sim::Scene> scenes_[3];
    std::optional<appearance::IdNet> id_;
    nn::TrainLog id_log_;
    std::map<int, motion::PredictionNet> motion_;
    std::map<int, nn::TrainLog> motion_logs_;
    std::map<int, metric::MetricNet> metric_;
    std::map<int, nn::TrainLog> metric_logs_;
    std::map<int, std::vector<sim::TripletInstance>> held_out_;
};

/// Seeds seed, seed+1, ... for `count` runs.
std::vector<std::uint64_t> seed_list(std::uint64_t first, int count);

double median(std::vector<double> values);

}  // namespace tripletrack::app
