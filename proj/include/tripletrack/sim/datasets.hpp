#pragma once

#include <span>
#include <string>
#include <vector>

#include "tripletrack/nn/param.hpp"
#include "tripletrack/sim/simulator.hpp"
#include "tripletrack/sim/types.hpp"

namespace tripletrack::sim {

/// Last `length` entries of `history`, front-padded with its earliest position when shorter.
std::vector<Position> padded_window(std::span<const Position> history, int length);

/// Window of `length` positions ending at `frame` (front-padded before the trajectory start)
/// and the candidate at frame + 1.
MotionSample window_at(const Trajectory& trajectory, int frame, int length);

struct MotionPair {
    MotionSample sample;
    int label = 0;  // 1: candidate continues the window, 0: it belongs to another trajectory
};

/// Every full window of `window` positions that has a true next position.
std::vector<MotionPair> make_positive_pairs(std::span<const Trajectory> trajectories, int window);

/// Positives plus one negative per positive: the same window paired with the position of a
/// different trajectory at the same frame. Throws std::invalid_argument with fewer than two trajectories.
std::vector<MotionPair> make_motion_pairs(std::span<const Trajectory> trajectories, int window, Rng& rng);

/// One channel input of the three-channel network.
struct TripletBundle {
    std::vector<double> descriptor;
    MotionSample motion;
    int identity = -1;
    int frame = 0;  // frame of the last window position
};

struct TripletInstance {
    TripletBundle anchor;
    TripletBundle positive;
    TripletBundle negative;
};

struct TripletBatchSpec {
    int identities_per_batch = 5;
    int instances_per_identity = 20;
    int batches = 1;
};

struct TripletBatches {
    std::vector<std::vector<TripletInstance>> batches;
    std::vector<int> skipped_identities;  // fewer than two usable timestamps
};

/// Draws triplet batches from one scene. Per identity it keeps an observed view (detection
/// positions where detected, ground truth otherwise) and the timestamps usable as anchors:
/// frames with a full window, a successor, and at least one detection inside the window.
class TripletSampler {
public:
    /// The scene must outlive the sampler.
    TripletSampler(const Scene& scene, int window);

    /// identities_per_batch x instances_per_identity instances. Anchor and positive: same identity,
    /// distinct timestamps. Negative: another identity's descriptor and window, paired with the
    /// next-frame position of an arbitrary live target.
    std::vector<TripletInstance> sample(const TripletBatchSpec& spec, Rng& rng) const;

    const std::vector<int>& skipped_identities() const { return skipped_; }
    int window() const { return window_; }

private:
    struct IdentityView {
        const Trajectory* traj = nullptr;
        std::vector<Position> observed;
        std::vector<int> detection;  // index into scene.detections or -1
        std::vector<int> usable;
    };

    TripletBundle bundle(const IdentityView& view, int frame, Rng& rng) const;

    const Scene* scene_;
    int window_;
    std::vector<IdentityView> views_;
    std::vector<std::size_t> eligible_;
    std::vector<int> skipped_;
};

/// `spec.batches` batches from a fresh sampler; identities lacking two usable timestamps are
/// reported in `skipped_identities`.
TripletBatches make_triplets(const Scene& scene, const TripletBatchSpec& spec, int window, Rng& rng);

/// Throws std::logic_error if any instance breaks the anchor/positive/negative identity rules.
void check_triplet_invariants(std::span<const TripletInstance> batch);

}  // namespace tripletrack::sim
