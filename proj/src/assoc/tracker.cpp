#include "tripletrack/assoc/tracker.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <tuple>

namespace tripletrack::assoc {

sim::Position Track::predicted() const {
    if (positions.size() < 2) return positions.back();
    const auto& a = positions[positions.size() - 2];
    const auto& b = positions.back();
    return {std::clamp(2.0 * b.x - a.x, sim::kCoordMin, sim::kCoordMax),
            std::clamp(2.0 * b.y - a.y, sim::kCoordMin, sim::kCoordMax)};
}

void TrackerConfig::validate() const {
    if (max_age < 0) throw std::invalid_argument("tracker.max_age must be >= 0");
    if (init_hits < 1) throw std::invalid_argument("tracker.init_hits must be >= 1");
}

Assignment greedy_match(const CostMatrix& costs) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> entries;
    for (std::size_t r = 0; r < costs.rows(); ++r) {
        for (std::size_t c = 0; c < costs.cols(); ++c) {
            if (costs.allowed(r, c)) entries.emplace_back(costs(r, c), r, c);
        }
    }
    std::sort(entries.begin(), entries.end());
    std::vector<char> row_used(costs.rows(), 0), col_used(costs.cols(), 0);
    Assignment out;
    for (const auto& [cost, r, c] : entries) {
        if (row_used[r] || col_used[c]) continue;
        row_used[r] = col_used[c] = 1;
        out.matches.emplace_back(r, c);
    }
    std::sort(out.matches.begin(), out.matches.end());
    for (std::size_t r = 0; r < costs.rows(); ++r) {
        if (!row_used[r]) out.unmatched_rows.push_back(r);
    }
    for (std::size_t c = 0; c < costs.cols(); ++c) {
        if (!col_used[c]) out.unmatched_cols.push_back(c);
    }
    return out;
}

Tracker::Tracker(const AffinityModel& affinity, const TrackerConfig& config) : affinity_(&affinity), config_(config) {
    config.validate();
}

void Tracker::emit(const Track& track, int frame, std::size_t offset) {
    rows_.push_back({frame, track.id, track.positions[offset], track.box, track.confidence});
}

void Tracker::step(int frame, std::span<const sim::Detection> detections) {
    if (frame_ != 0 && frame <= frame_) {
        throw std::invalid_argument("tracker: frame " + std::to_string(frame) + " does not follow frame " +
                                    std::to_string(frame_));
    }
    for (const auto& d : detections) {
        if (d.frame != frame) {
            throw std::invalid_argument("tracker: detection of frame " + std::to_string(d.frame) +
                                        " passed with frame " + std::to_string(frame));
        }
    }
    while (frame_ != 0 && frame_ + 1 < frame) step(frame_ + 1, {});
    frame_ = frame;

    std::vector<std::size_t> live;
    std::vector<const Track*> live_ptrs;
    for (std::size_t k = 0; k < tracks_.size(); ++k) {
        if (tracks_[k].state != TrackState::terminated) {
            live.push_back(k);
            live_ptrs.push_back(&tracks_[k]);
        }
    }
    Assignment assignment;
    if (!live.empty() && !detections.empty()) {
        const CostMatrix costs = affinity_->costs(live_ptrs, detections);
        if (costs.rows() != live.size() || costs.cols() != detections.size()) {
            throw std::logic_error("tracker: affinity returned a " + std::to_string(costs.rows()) + "x" +
                                   std::to_string(costs.cols()) + " matrix");
        }
        assignment = config_.matcher == Matcher::hungarian ? hungarian(costs) : greedy_match(costs);
    } else {
        for (std::size_t r = 0; r < live.size(); ++r) assignment.unmatched_rows.push_back(r);
        for (std::size_t c = 0; c < detections.size(); ++c) assignment.unmatched_cols.push_back(c);
    }

    for (auto [r, c] : assignment.matches) {
        Track& t = tracks_[live[r]];
        const auto& d = detections[c];
        t.positions.push_back(d.position);
        t.observed.push_back(true);
        t.identities.push_back(d.truth_id.value_or(-1));
        t.descriptor = d.descriptor;
        t.box = d.box;
        t.confidence = d.confidence;
        t.misses = 0;
        ++t.hits;
        if (t.state == TrackState::tentative && t.hits >= config_.init_hits) {
            t.state = TrackState::confirmed;
            t.id = next_id_++;
            for (std::size_t k = 0; k < t.positions.size(); ++k) {
                if (t.observed[k]) emit(t, t.birth_frame + static_cast<int>(k), k);
            }
        } else if (t.state == TrackState::confirmed) {
            emit(t, frame, t.positions.size() - 1);
        }
    }
    for (auto r : assignment.unmatched_rows) {
        Track& t = tracks_[live[r]];
        t.hits = 0;
        if (t.state == TrackState::tentative || ++t.misses > config_.max_age) {
            t.state = TrackState::terminated;
            continue;
        }
        t.positions.push_back(t.predicted());
        t.observed.push_back(false);
        t.identities.push_back(-1);
    }
    for (auto c : assignment.unmatched_cols) {
        const auto& d = detections[c];
        Track t;
        t.birth_frame = frame;
        t.positions = {d.position};
        t.observed = {true};
        t.identities = {d.truth_id.value_or(-1)};
        t.descriptor = d.descriptor;
        t.box = d.box;
        t.confidence = d.confidence;
        t.hits = 1;
        if (config_.init_hits <= 1) {
            t.state = TrackState::confirmed;
            t.id = next_id_++;
            emit(t, frame, 0);
        }
        tracks_.push_back(std::move(t));
    }
    assignments_.push_back(std::move(assignment));
}

std::vector<TrackRow> Tracker::rows() const {
    auto out = rows_;
    std::stable_sort(out.begin(), out.end(),
                     [](const TrackRow& a, const TrackRow& b) { return std::tie(a.frame, a.id) < std::tie(b.frame, b.id); });
    return out;
}

TrackingResult run_tracker(std::span<const sim::Detection> detections, const AffinityModel& affinity,
                           const TrackerConfig& config, int first_frame, int last_frame) {
    if (last_frame < first_frame) {
        last_frame = first_frame - 1;
        for (const auto& d : detections) last_frame = std::max(last_frame, d.frame);
    }
    std::vector<sim::Detection> sorted(detections.begin(), detections.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const sim::Detection& a, const sim::Detection& b) { return a.frame < b.frame; });
    Tracker tracker(affinity, config);
    std::size_t k = 0;
    while (k < sorted.size() && sorted[k].frame < first_frame) ++k;
    for (int f = first_frame; f <= last_frame; ++f) {
        const std::size_t begin = k;
        while (k < sorted.size() && sorted[k].frame == f) ++k;
        tracker.step(f, std::span<const sim::Detection>(sorted.data() + begin, k - begin));
    }
    return {tracker.tracks(), tracker.rows()};
}

}  // namespace tripletrack::assoc
