#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "tripletrack/app/pipeline.hpp"

namespace tripletrack::app {

/// Raised when a command needs an artifact that an earlier command produces.
class MissingPrerequisite : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shared state of every subcommand. Outputs go under `out`; existing files are only replaced
/// with `force`.
struct CommandContext {
    RunConfig config;
    std::filesystem::path out = "out";
    bool force = false;
};

/// Output file names inside the output directory.
namespace files {
inline constexpr const char* ground_truth = "gt.csv";
inline constexpr const char* detections = "detections.csv";
inline constexpr const char* descriptors = "descriptors.csv";
inline constexpr const char* id_checkpoint = "id_net.ckpt";
inline constexpr const char* motion_checkpoint = "motion_net.ckpt";
inline constexpr const char* metric_checkpoint = "metric_net.ckpt";
inline constexpr const char* id_log = "id_log.csv";
inline constexpr const char* motion_log = "motion_log.csv";
inline constexpr const char* metric_log = "metric_log.csv";
inline constexpr const char* tracks = "tracks.csv";
inline constexpr const char* baseline_tracks = "baseline_tracks.csv";
inline constexpr const char* metrics_csv = "metrics.csv";
inline constexpr const char* metrics_text = "metrics.txt";
inline constexpr const char* sweep_window = "sweep_N.csv";
inline constexpr const char* sweep_ablation = "sweep_ablation.csv";
}  // namespace files

Split parse_split(const std::string& name);
const char* split_name(Split split);

/// Writes the ground truth, detections and descriptor sidecar of one split.
void cmd_simulate(const CommandContext& ctx, Split split);

enum class TrainStage { id, motion, metric };
TrainStage parse_train_stage(const std::string& name);

/// Trains one stage and writes its checkpoint and training log. The metric stage starts from the
/// id and motion checkpoints in the output directory and raises MissingPrerequisite without them.
void cmd_train(const CommandContext& ctx, TrainStage stage);

struct TrackOptions {
    std::optional<std::filesystem::path> detections;   // default: out/detections.csv
    std::optional<std::filesystem::path> descriptors;  // default: out/descriptors.csv
    std::optional<std::filesystem::path> checkpoint;   // default: out/metric_net.ckpt
    bool baseline = false;                             // greedy IoU matching, no checkpoint
};

/// Tracks a detection file and writes MOT rows of the confirmed tracks.
void cmd_track(const CommandContext& ctx, const TrackOptions& options);

struct EvaluateOptions {
    std::optional<std::filesystem::path> ground_truth;  // default: out/gt.csv
    std::optional<std::filesystem::path> result;        // default: out/tracks.csv
    std::optional<double> threshold;                    // default: evaluation.iou_threshold
};

/// Writes the CLEAR-MOT report as CSV and as a text table; returns the report.
eval::MotReport cmd_evaluate(const CommandContext& ctx, const EvaluateOptions& options);

enum class SweepParameter { window, ablation };
SweepParameter parse_sweep_parameter(const std::string& name);

/// Window sweep: one row per (seed, N) for N in the configured range. Ablation: one row per
/// (seed, variant). Seeds are config.seed onwards. Returns the CSV text written.
std::string cmd_sweep(const CommandContext& ctx, SweepParameter parameter, int seeds);

}  // namespace tripletrack::app
