#pragma once

#include <span>
#include <string>
#include <vector>

#include "tripletrack/eval/box.hpp"

namespace tripletrack::eval {

/// One box of a ground-truth or hypothesis track.
struct BoxRow {
    int frame = 0;
    int id = 0;
    Box box;
};

struct FrameEvents {
    int frame = 0;
    int matches = 0;
    int false_positives = 0;
    int misses = 0;
    int switches = 0;
};

/// MOTP is the mean IoU of matched pairs (overlap convention, higher is better).
struct MotReport {
    double mota = 0.0;
    double motp = 0.0;
    double mostly_tracked = 0.0;  // fraction of GT tracks matched in >= 80% of their frames
    double mostly_lost = 0.0;     // fraction matched in < 20%
    int gt_tracks = 0;
    long false_positives = 0;
    long misses = 0;
    long id_switches = 0;
    long fragmentations = 0;
    long matches = 0;
    long gt_boxes = 0;
    long hypothesis_boxes = 0;
    std::vector<FrameEvents> frames;
};

inline constexpr double kDefaultIouThreshold = 0.5;
inline constexpr double kMostlyTracked = 0.8;
inline constexpr double kMostlyLost = 0.2;

/// CLEAR-MOT accumulation. Correspondences from the previous frame are kept while their IoU stays at
/// or above the threshold; the rest are matched by minimum total (1 - IoU). A GT whose hypothesis
/// differs from its last matched one counts an identity switch. With no GT boxes MOTA is
/// 1 - (FP + IDS) instead of a ratio. Throws std::invalid_argument for a threshold outside (0, 1)
/// or an id repeated within one frame.
MotReport evaluate(std::span<const BoxRow> ground_truth, std::span<const BoxRow> hypotheses,
                   double iou_threshold = kDefaultIouThreshold);

/// Aligned two-column text table.
std::string report_table(const MotReport& report);
/// `metric,value` CSV with the same rows as the table.
std::string report_csv(const MotReport& report);

}  // namespace tripletrack::eval
