#pragma once

#include <span>
#include <vector>

#include "tripletrack/assoc/hungarian.hpp"
#include "tripletrack/sim/types.hpp"

namespace tripletrack::assoc {

enum class TrackState { tentative, confirmed, terminated };

struct Track {
    int id = -1;  // assigned on confirmation
    TrackState state = TrackState::tentative;
    int birth_frame = 0;
    std::vector<sim::Position> positions;  // one per frame from birth_frame, coasted frames included
    std::vector<bool> observed;            // true where a detection was matched
    std::vector<int> identities;           // ground-truth id of each matched detection, -1 for false positives
    std::vector<double> descriptor;        // latest matched descriptor
    sim::BoxSize box;
    double confidence = 0.0;
    int misses = 0;
    int hits = 0;  // consecutive matches

    int last_frame() const { return birth_frame + static_cast<int>(positions.size()) - 1; }
    sim::Position last_position() const { return positions.back(); }
    /// Linear extrapolation one frame ahead; the last position for single-frame tracks.
    sim::Position predicted() const;
};

/// Scores every (live track, detection) pair. Implementations forbid gated pairs.
class AffinityModel {
public:
    virtual ~AffinityModel() = default;
    virtual CostMatrix costs(std::span<const Track* const> tracks, std::span<const sim::Detection> detections) const = 0;
};

enum class Matcher { hungarian, greedy };

struct TrackerConfig {
    int max_age = 10;
    int init_hits = 2;
    Matcher matcher = Matcher::hungarian;

    void validate() const;
};

/// One output row per matched frame of a confirmed track.
struct TrackRow {
    int frame = 0;
    int id = 0;
    sim::Position position;
    sim::BoxSize box;
    double confidence = 0.0;
};

/// Lowest-cost-first matching that never revisits a decision.
Assignment greedy_match(const CostMatrix& costs);

class Tracker {
public:
    Tracker(const AffinityModel& affinity, const TrackerConfig& config);

    /// Processes the detections of `frame`; skipped frames are processed as empty first.
    /// Throws std::invalid_argument when `frame` is not after the previous one or a detection
    /// belongs to another frame.
    void step(int frame, std::span<const sim::Detection> detections);

    const std::vector<Track>& tracks() const { return tracks_; }
    /// Rows sorted by (frame, id).
    std::vector<TrackRow> rows() const;
    int frame() const { return frame_; }

    /// The assignment solved at every step.
    const std::vector<Assignment>& assignments() const { return assignments_; }

private:
    void emit(const Track& track, int frame, std::size_t offset);

    const AffinityModel* affinity_;
    TrackerConfig config_;
    std::vector<Track> tracks_;
    std::vector<TrackRow> rows_;
    std::vector<Assignment> assignments_;
    int frame_ = 0;
    int next_id_ = 1;
};

struct TrackingResult {
    std::vector<Track> tracks;
    std::vector<TrackRow> rows;
};

/// Runs frames first_frame..last_frame (frames without detections included). With
/// last_frame < first_frame the range ends at the latest detection frame.
TrackingResult run_tracker(std::span<const sim::Detection> detections, const AffinityModel& affinity,
                           const TrackerConfig& config, int first_frame = 1, int last_frame = 0);

}  // namespace tripletrack::assoc
