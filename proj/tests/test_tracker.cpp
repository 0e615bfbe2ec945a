#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "tripletrack/assoc/affinity.hpp"
#include "tripletrack/assoc/tracker.hpp"

using namespace tripletrack;
using namespace tripletrack::assoc;

namespace {

/// Distance between the track's extrapolated position and the detection.
class PositionAffinity : public AffinityModel {
public:
    explicit PositionAffinity(double gate) : gate_(gate) {}
    CostMatrix costs(std::span<const Track* const> tracks, std::span<const sim::Detection> detections) const override {
        CostMatrix c(tracks.size(), detections.size());
        for (std::size_t r = 0; r < tracks.size(); ++r) {
            const auto p = tracks[r]->predicted();
            for (std::size_t k = 0; k < detections.size(); ++k) {
                const auto& q = detections[k].position;
                c.set(r, k, std::hypot(p.x - q.x, p.y - q.y));
            }
        }
        c.apply_gate(gate_);
        return c;
    }

private:
    double gate_;
};

sim::Detection det(int frame, double x, double y, int truth) {
    sim::Detection d;
    d.frame = frame;
    d.position = {x, y};
    d.descriptor = {0.0};
    d.truth_id = truth;
    return d;
}

/// Reported frames of each output id.
std::map<int, std::vector<int>> frames_by_id(const std::vector<TrackRow>& rows) {
    std::map<int, std::vector<int>> out;
    for (const auto& r : rows) out[r.id].push_back(r.frame);
    return out;
}

}  // namespace

TEST(Tracker, SingleTargetKeepsOneId) {
    std::vector<sim::Detection> dets;
    for (int f = 1; f <= 20; ++f) dets.push_back(det(f, -0.3 + 0.01 * f, 0.0, 0));
    const PositionAffinity affinity(0.05);
    const auto result = run_tracker(dets, affinity, {});
    ASSERT_EQ(result.rows.size(), 20u);
    for (const auto& r : result.rows) EXPECT_EQ(r.id, result.rows.front().id);
    for (int f = 1; f <= 20; ++f) EXPECT_EQ(result.rows[static_cast<std::size_t>(f - 1)].frame, f);
}

TEST(Tracker, TentativeTrackNeedsInitHits) {
    const PositionAffinity affinity(0.05);
    TrackerConfig config;
    config.init_hits = 3;
    Tracker tracker(affinity, config);
    const std::vector<sim::Detection> f1{det(1, 0.0, 0.0, 0)}, f2{det(2, 0.01, 0.0, 0)}, f3{det(3, 0.02, 0.0, 0)};
    tracker.step(1, f1);
    tracker.step(2, f2);
    EXPECT_TRUE(tracker.rows().empty());
    EXPECT_EQ(tracker.tracks().front().state, TrackState::tentative);
    tracker.step(3, f3);
    EXPECT_EQ(tracker.tracks().front().state, TrackState::confirmed);
    // Confirmation back-fills the matched frames.
    EXPECT_EQ(tracker.rows().size(), 3u);
}

TEST(Tracker, UnmatchedTentativeTrackDies) {
    const PositionAffinity affinity(0.05);
    Tracker tracker(affinity, {});
    const std::vector<sim::Detection> f1{det(1, 0.0, 0.0, 0)};
    tracker.step(1, f1);
    tracker.step(2, {});
    EXPECT_EQ(tracker.tracks().front().state, TrackState::terminated);
    EXPECT_TRUE(tracker.rows().empty());
}

TEST(Tracker, TerminatesAfterMaxAgePlusOneMisses) {
    for (int max_age : {0, 1, 3, 5}) {
        const PositionAffinity affinity(0.05);
        TrackerConfig config;
        config.max_age = max_age;
        Tracker tracker(affinity, config);
        int f = 1;
        for (; f <= 3; ++f) {
            const std::vector<sim::Detection> d{det(f, 0.01 * f, 0.0, 0)};
            tracker.step(f, d);
        }
        for (int miss = 1; miss <= max_age; ++miss, ++f) {
            tracker.step(f, {});
            EXPECT_EQ(tracker.tracks().front().state, TrackState::confirmed) << "max_age=" << max_age;
        }
        tracker.step(f, {});
        EXPECT_EQ(tracker.tracks().front().state, TrackState::terminated) << "max_age=" << max_age;
    }
}

TEST(Tracker, CoastingBridgesAGap) {
    std::vector<sim::Detection> dets;
    for (int f = 1; f <= 20; ++f) {
        if (f >= 8 && f <= 10) continue;
        dets.push_back(det(f, -0.3 + 0.01 * f, 0.1, 0));
    }
    const PositionAffinity affinity(0.02);
    TrackerConfig config;
    config.max_age = 3;
    const auto result = run_tracker(dets, affinity, config);
    const auto ids = frames_by_id(result.rows);
    ASSERT_EQ(ids.size(), 1u);
    // Coasted frames are not reported.
    EXPECT_EQ(ids.begin()->second.size(), 17u);
    const auto& track = result.tracks.front();
    EXPECT_FALSE(track.observed[8]);
    EXPECT_NEAR(track.positions[8].x, -0.3 + 0.01 * 9, 1e-12);
}

TEST(Tracker, GapLongerThanMaxAgeStartsANewTrack) {
    std::vector<sim::Detection> dets;
    for (int f = 1; f <= 20; ++f) {
        if (f >= 8 && f <= 12) continue;
        dets.push_back(det(f, -0.3 + 0.01 * f, 0.1, 0));
    }
    const PositionAffinity affinity(0.02);
    TrackerConfig config;
    config.max_age = 3;
    const auto result = run_tracker(dets, affinity, config);
    EXPECT_EQ(frames_by_id(result.rows).size(), 2u);
}

TEST(Tracker, RejectsOutOfOrderFrames) {
    const PositionAffinity affinity(0.05);
    Tracker tracker(affinity, {});
    tracker.step(5, {});
    EXPECT_THROW(tracker.step(5, {}), std::invalid_argument);
    EXPECT_THROW(tracker.step(3, {}), std::invalid_argument);
    const std::vector<sim::Detection> wrong{det(7, 0.0, 0.0, 0)};
    EXPECT_THROW(tracker.step(6, wrong), std::invalid_argument);
}

TEST(Tracker, SkippedFramesAreProcessedAsEmpty) {
    const PositionAffinity affinity(0.05);
    Tracker tracker(affinity, {});
    const std::vector<sim::Detection> f1{det(1, 0.0, 0.0, 0)};
    tracker.step(1, f1);
    tracker.step(4, {});
    EXPECT_EQ(tracker.assignments().size(), 4u);
}

TEST(Tracker, CrossingTargetsKeepTheirIds) {
    std::vector<sim::Detection> dets;
    for (int f = 1; f <= 30; ++f) {
        dets.push_back(det(f, -0.15 + 0.01 * f, 0.0 + 0.002 * f, 0));
        dets.push_back(det(f, 0.15 - 0.01 * f, 0.08 - 0.002 * f, 1));
    }
    const PositionAffinity affinity(0.03);
    const auto result = run_tracker(dets, affinity, {});
    ASSERT_EQ(result.tracks.size(), 2u);
    for (const auto& t : result.tracks) {
        std::set<int> truth(t.identities.begin(), t.identities.end());
        EXPECT_EQ(truth.size(), 1u);
    }
}

TEST(Tracker, MatchesAreOneToOnePerFrame) {
    std::vector<sim::Detection> dets;
    for (int f = 1; f <= 15; ++f) {
        for (int k = 0; k < 4; ++k) dets.push_back(det(f, -0.2 + 0.1 * k + 0.003 * f, 0.0, k));
    }
    const PositionAffinity affinity(0.2);
    const auto result = run_tracker(dets, affinity, {});
    std::set<std::pair<int, int>> frame_id;
    for (const auto& r : result.rows) EXPECT_TRUE(frame_id.insert({r.frame, r.id}).second);
    std::map<int, int> per_frame;
    for (const auto& r : result.rows) ++per_frame[r.frame];
    for (const auto& [frame, count] : per_frame) EXPECT_LE(count, 4);
}

TEST(Tracker, ZeroGateForbidsEveryPairing) {
    std::vector<sim::Detection> dets;
    for (int f = 1; f <= 10; ++f) dets.push_back(det(f, 0.01 * f, 0.0, 0));
    const PositionAffinity affinity(0.0);
    const auto result = run_tracker(dets, affinity, {});
    EXPECT_TRUE(result.rows.empty());
    EXPECT_EQ(result.tracks.size(), 10u);
}

TEST(Tracker, WiderGateNeverMatchesLess) {
    std::vector<sim::Detection> dets;
    for (int f = 1; f <= 25; ++f) {
        dets.push_back(det(f, -0.3 + 0.012 * f, 0.05 * std::sin(0.3 * f), 0));
        dets.push_back(det(f, 0.3 - 0.008 * f, -0.1, 1));
    }
    std::size_t previous = 0;
    for (double gate : {0.0, 0.002, 0.01, 0.02, 0.05, 0.1}) {
        const PositionAffinity affinity(gate);
        std::size_t matches = 0;
        const auto result = run_tracker(dets, affinity, {});
        for (const auto& t : result.tracks) {
            for (bool o : t.observed) matches += o ? 1 : 0;
            matches -= 1;  // the birth detection is not a match
        }
        EXPECT_GE(matches, previous) << "gate=" << gate;
        previous = matches;
    }
}

TEST(Tracker, RowsSortedByFrameThenId) {
    std::vector<sim::Detection> dets;
    for (int f = 1; f <= 10; ++f) {
        dets.push_back(det(f, 0.2, 0.01 * f, 1));
        dets.push_back(det(f, -0.2, 0.01 * f, 0));
    }
    const PositionAffinity affinity(0.05);
    const auto rows = run_tracker(dets, affinity, {}).rows;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        EXPECT_TRUE(rows[k - 1].frame < rows[k].frame ||
                    (rows[k - 1].frame == rows[k].frame && rows[k - 1].id < rows[k].id));
    }
}

TEST(Tracker, InvalidConfig) {
    const PositionAffinity affinity(0.05);
    TrackerConfig config;
    config.init_hits = 0;
    EXPECT_THROW(Tracker(affinity, config), std::invalid_argument);
    config.init_hits = 1;
    config.max_age = -1;
    EXPECT_THROW(Tracker(affinity, config), std::invalid_argument);
}

TEST(GreedyMatch, TakesCheapestFirst) {
    const auto c = CostMatrix::from_rows({{1, 2}, {2, 10}});
    const auto greedy = greedy_match(c);
    EXPECT_EQ(greedy.total_cost(c), 11.0);
    EXPECT_EQ(hungarian(c).total_cost(c), 4.0);
}

TEST(IouAffinity, ForbidsLowOverlap) {
    Track t;
    t.positions = {{0.0, 0.0}};
    t.observed = {true};
    t.box = {0.1, 0.1};
    const Track* tracks[] = {&t};
    sim::Detection same = det(2, 0.0, 0.0, 0), near = det(2, 0.02, 0.0, 0), far = det(2, 0.3, 0.0, 0);
    same.box = near.box = far.box = {0.1, 0.1};
    const std::vector<sim::Detection> dets{same, near, far};
    const auto c = IouAffinity(0.3).costs(tracks, dets);
    EXPECT_NEAR(c(0, 0), 0.0, 1e-12);
    // Overlap 0.08 x 0.1 over union 0.012.
    EXPECT_NEAR(c(0, 1), 1.0 - 0.008 / 0.012, 1e-12);
    EXPECT_FALSE(c.allowed(0, 2));
}

TEST(AffinityMatrix, ShapeAndGate) {
    Rng rng(4);
    appearance::IdNet id({3, 6, 5, 2});
    id.init(rng, 0.5);
    motion::PredictionNet motion({6, 3});
    motion.init(rng, 0.5);
    metric::MetricNet net(id, motion, {4, {}});
    net.init_fuse(rng, 0.5);

    std::vector<Track> tracks(3);
    for (std::size_t k = 0; k < tracks.size(); ++k) {
        auto& t = tracks[k];
        t.state = TrackState::confirmed;
        for (int f = 0; f < 5; ++f) {
            t.positions.push_back({-0.2 + 0.1 * static_cast<double>(k), 0.01 * f});
            t.observed.push_back(true);
        }
        t.descriptor = {0.1 * static_cast<double>(k), 0.2, -0.3};
    }
    std::vector<const Track*> ptrs;
    for (const auto& t : tracks) ptrs.push_back(&t);
    std::vector<sim::Detection> dets;
    for (int k = 0; k < 2; ++k) {
        auto d = det(6, -0.2 + 0.1 * k, 0.05, k);
        d.descriptor = {0.1 * k, 0.2, -0.3};
        dets.push_back(d);
    }
    const auto open = affinity_matrix(net, ptrs, dets, 1e9);
    ASSERT_EQ(open.rows(), 3u);
    ASSERT_EQ(open.cols(), 2u);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 2; ++c) {
            EXPECT_TRUE(open.allowed(r, c));
            EXPECT_GE(open(r, c), 0.0);
        }
    const auto closed = affinity_matrix(net, ptrs, dets, 0.0);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(closed.allowed(r, c), open(r, c) == 0.0);
}
