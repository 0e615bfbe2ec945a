#pragma once

#include "tripletrack/assoc/tracker.hpp"
#include "tripletrack/metric/metric_net.hpp"
#include "tripletrack/metric/verification_net.hpp"

namespace tripletrack::assoc {

/// Joint features of both sides of every (track, detection) pair.
///   track side: latest descriptor, window ending one frame before the last, last position as candidate.
///   detection side: detection descriptor, window ending at the last position, detection position as candidate.
/// Tentative tracks have no trustworthy window yet, so both sides share the track's own padded window
/// and last position; their cost then only reflects appearance.
struct PairFeatures {
    nn::Tensor track;  // [T x F]
    nn::Tensor pair;   // [T*M x F], row i*M + j
};

PairFeatures pair_features(const metric::JointFeatures& joint, std::span<const Track* const> tracks,
                           std::span<const sim::Detection> detections);

struct EmbeddingGate {
    /// Pairs with embedding distance above this are forbidden.
    double gate = 1.0;
    /// Tentative tracks additionally forbid detections farther than this (normalized units);
    /// their cost adds the position distance so nearer detections win ties.
    double young_position_gate = 0.05;

    void validate() const;
};

/// Euclidean distance between track and detection embeddings.
class EmbeddingAffinity : public AffinityModel {
public:
    EmbeddingAffinity(const metric::MetricNet& net, const EmbeddingGate& gate);
    CostMatrix costs(std::span<const Track* const> tracks, std::span<const sim::Detection> detections) const override;

private:
    const metric::MetricNet* net_;
    EmbeddingGate gate_;
};

/// Cost matrix of the learned affinity with entries above `gate` forbidden.
CostMatrix affinity_matrix(const metric::MetricNet& net, std::span<const Track* const> tracks,
                           std::span<const sim::Detection> detections, double gate);

/// 1 - P(same identity) from the verification head.
class VerificationAffinity : public AffinityModel {
public:
    VerificationAffinity(const metric::VerificationNet& net, const EmbeddingGate& gate);
    CostMatrix costs(std::span<const Track* const> tracks, std::span<const sim::Detection> detections) const override;

private:
    const metric::VerificationNet* net_;
    EmbeddingGate gate_;
};

/// 1 - IoU between the track's last box and the detection box; pairs below `min_iou` forbidden.
class IouAffinity : public AffinityModel {
public:
    explicit IouAffinity(double min_iou = 0.3);
    CostMatrix costs(std::span<const Track* const> tracks, std::span<const sim::Detection> detections) const override;

private:
    double min_iou_;
};

}  // namespace tripletrack::assoc
