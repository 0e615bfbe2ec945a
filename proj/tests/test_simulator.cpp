#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "tripletrack/io/mot_csv.hpp"
#include "tripletrack/sim/datasets.hpp"
#include "tripletrack/sim/simulator.hpp"

using namespace tripletrack;
using namespace tripletrack::sim;

namespace {

SceneConfig clean_scene() {
    SceneConfig c;
    c.drop_rate = 0.0;
    c.false_positive_rate = 0.0;
    c.occlusion_rate = 0.0;
    return c;
}

int trajectory_frames(const Scene& scene) {
    int total = 0;
    for (const auto& t : scene.trajectories) total += t.length();
    return total;
}

}  // namespace

TEST(Trajectory, NoiselessConstantVelocity) {
    MotionConfig m;
    m.accel_noise = 0.0;
    m.curvature_amplitude = 0.0;
    Rng rng(1);
    const auto t = sample_trajectory(m, {0.0, 0.0}, {0.01, 0.0}, 5, rng);
    ASSERT_EQ(t.length(), 5);
    for (int k = 0; k < 5; ++k) {
        EXPECT_NEAR(t.positions[static_cast<std::size_t>(k)].x, 0.01 * k, 1e-15);
        EXPECT_EQ(t.positions[static_cast<std::size_t>(k)].y, 0.0);
    }
}

TEST(Trajectory, TwentyFramesInsideTheImage) {
    SceneConfig c;
    Rng rng(2);
    for (int k = 0; k < 200; ++k) {
        const auto t = sample_trajectory(c, 20, rng);
        ASSERT_EQ(t.length(), 20);
        for (const auto& p : t.positions) EXPECT_TRUE(in_bounds(p));
    }
}

TEST(Trajectory, StepsNeverExceedMaxSpeed) {
    SceneConfig c;
    c.motion.accel_noise = 0.005;
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
        const auto t = sample_trajectory(c, 60, rng);
        for (std::size_t i = 1; i < t.positions.size(); ++i) {
            const double step = std::hypot(t.positions[i].x - t.positions[i - 1].x, t.positions[i].y - t.positions[i - 1].y);
            EXPECT_LE(step, c.motion.max_speed + 1e-12);
        }
    }
}

TEST(Trajectory, ReflectsAtTheBoundary) {
    MotionConfig m;
    m.accel_noise = 0.0;
    m.curvature_amplitude = 0.0;
    Rng rng(1);
    const auto t = sample_trajectory(m, {0.49, 0.0}, {0.02, 0.0}, 4, rng);
    EXPECT_NEAR(t.positions[1].x, 0.49, 1e-12);  // 0.51 mirrored to 0.49
    EXPECT_NEAR(t.positions[2].x, 0.47, 1e-12);
    for (const auto& p : t.positions) EXPECT_TRUE(in_bounds(p));
}

TEST(Trajectory, TooShortThrows) {
    Rng rng(1);
    EXPECT_THROW(sample_trajectory(SceneConfig{}, 1, rng), std::invalid_argument);
}

TEST(Trajectory, MeanStepMatchesConfiguredSpeed) {
    SceneConfig c;
    Rng rng(4);
    constexpr int n = 10000;
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < n; ++k) {
        const auto t = sample_trajectory(c, 2, rng);
        const double step = std::hypot(t.positions[1].x - t.positions[0].x, t.positions[1].y - t.positions[0].y);
        sum += step;
        sum_sq += step * step;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum_sq / n - mean * mean);
    EXPECT_LT(std::abs(mean - c.motion.speed_mean), 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST(Scene, CleanSceneDetectsEveryFrame) {
    const Scene s = generate_scene(clean_scene());
    EXPECT_EQ(static_cast<int>(s.detections.size()), trajectory_frames(s));
    EXPECT_EQ(s.true_detection_count(), trajectory_frames(s));
}

TEST(Scene, FullDropLeavesOnlyFalsePositives) {
    SceneConfig c;
    c.drop_rate = 1.0;
    const Scene s = generate_scene(c);
    EXPECT_EQ(s.true_detection_count(), 0);
    EXPECT_FALSE(s.detections.empty());
    for (const auto& d : s.detections) EXPECT_FALSE(d.truth_id.has_value());
}

TEST(Scene, DropCountFollowsBinomial) {
    SceneConfig c = clean_scene();
    c.identities = 50;
    c.frames = 200;
    c.min_track_length = 200;
    c.drop_rate = 0.1;
    const Scene s = generate_scene(c);
    ASSERT_EQ(trajectory_frames(s), 10000);
    const double missing = 10000.0 - s.true_detection_count();
    const double sigma = std::sqrt(10000.0 * 0.1 * 0.9);
    EXPECT_LT(std::abs(missing - 1000.0), 3.0 * sigma);
}

TEST(Scene, PositionsStayInsideTheImage) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SceneConfig c;
        c.seed = seed;
        c.motion.speed_mean = 0.012;
        c.motion.max_speed = 0.03;
        const Scene s = generate_scene(c);
        for (const auto& t : s.trajectories) {
            for (const auto& p : t.positions) ASSERT_TRUE(in_bounds(p));
        }
        for (const auto& d : s.detections) ASSERT_TRUE(in_bounds(d.position));
    }
}

TEST(Scene, DetectionsCarryTheirTrajectoryIdentity) {
    const Scene s = generate_scene(SceneConfig{});
    for (const auto& d : s.detections) {
        ASSERT_EQ(d.descriptor.size(), 16u);
        EXPECT_GE(d.confidence, 0.0);
        EXPECT_LE(d.confidence, 1.0);
        if (!d.truth_id) continue;
        const auto& t = s.trajectories[static_cast<std::size_t>(*d.truth_id)];
        ASSERT_EQ(t.identity, *d.truth_id);
        ASSERT_TRUE(t.covers(d.frame));
        EXPECT_LT(std::hypot(d.position.x - t.at(d.frame).x, d.position.y - t.at(d.frame).y), 0.01);
        EXPECT_EQ(d.box, t.box);
    }
}

TEST(Scene, DetectionsSortedByFrame) {
    const Scene s = generate_scene(SceneConfig{});
    for (std::size_t k = 1; k < s.detections.size(); ++k) {
        EXPECT_LE(s.detections[k - 1].frame, s.detections[k].frame);
    }
}

TEST(Scene, GenerationIsAPureFunctionOfTheConfig) {
    SceneConfig c;
    c.seed = 99;
    const Scene a = generate_scene(c);
    const Scene b = generate_scene(c);
    const io::ImageSize image;
    EXPECT_EQ(io::write_mot_csv(io::detection_rows(a.detections, image)),
              io::write_mot_csv(io::detection_rows(b.detections, image)));
    EXPECT_EQ(io::write_descriptor_csv(a.detections), io::write_descriptor_csv(b.detections));
    EXPECT_EQ(io::write_mot_csv(io::ground_truth_rows(a, image)), io::write_mot_csv(io::ground_truth_rows(b, image)));
    c.seed = 100;
    EXPECT_NE(io::write_descriptor_csv(generate_scene(c).detections), io::write_descriptor_csv(a.detections));
}

TEST(Scene, AppearanceSeedFixesThePopulation) {
    SceneConfig c;
    c.appearance_seed = 5;
    c.seed = 1;
    const Scene a = generate_scene(c);
    c.seed = 2;
    const Scene b = generate_scene(c);
    EXPECT_EQ(a.prototypes, b.prototypes);
    c.appearance_seed = 6;
    EXPECT_NE(generate_scene(c).prototypes, a.prototypes);
}

TEST(Scene, OcclusionHidesGroundTruth) {
    SceneConfig c = clean_scene();
    c.occlusion_rate = 0.05;
    const Scene s = generate_scene(c);
    int hidden = 0;
    for (const auto& v : s.visible) hidden += static_cast<int>(std::count(v.begin(), v.end(), false));
    EXPECT_GT(hidden, 0);
    EXPECT_EQ(s.true_detection_count() + hidden, trajectory_frames(s));
}

TEST(Scene, InvalidConfigNamesTheField) {
    SceneConfig c;
    c.drop_rate = 1.5;
    try {
        generate_scene(c);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("drop_rate"), std::string::npos);
    }
    c = SceneConfig{};
    c.descriptor_dim = 0;
    EXPECT_THROW(generate_scene(c), std::invalid_argument);
}

TEST(Windows, PaddedWindowRepeatsTheEarliestPosition) {
    const std::vector<Position> h{{0.1, 0.1}, {0.2, 0.2}};
    const auto w = padded_window(h, 4);
    ASSERT_EQ(w.size(), 4u);
    EXPECT_EQ(w[0], h[0]);
    EXPECT_EQ(w[1], h[0]);
    EXPECT_EQ(w[2], h[0]);
    EXPECT_EQ(w[3], h[1]);
    const std::vector<Position> long_history{{0, 0}, {0.1, 0}, {0.2, 0}, {0.3, 0}};
    EXPECT_EQ(padded_window(long_history, 2), (std::vector<Position>{{0.2, 0}, {0.3, 0}}));
}

TEST(MotionPairs, OneTrajectoryCannotFormNegatives) {
    SceneConfig c;
    Rng rng(1);
    std::vector<Trajectory> one{sample_trajectory(c, 7, rng)};
    EXPECT_EQ(make_positive_pairs(one, 6).size(), 1u);
    EXPECT_THROW(make_motion_pairs(one, 6, rng), std::invalid_argument);
}

TEST(MotionPairs, WindowEnumerationCount) {
    SceneConfig c;
    Rng rng(2);
    std::vector<Trajectory> two{sample_trajectory(c, 20, rng), sample_trajectory(c, 20, rng)};
    two[1].identity = 1;
    const auto positives = make_positive_pairs(two, 6);
    EXPECT_EQ(positives.size(), 2u * 14u);
    const auto pairs = make_motion_pairs(two, 6, rng);
    ASSERT_EQ(pairs.size(), 2u * 28u);
    int pos = 0;
    for (const auto& p : pairs) {
        EXPECT_EQ(p.sample.window.size(), 6u);
        pos += p.label;
    }
    EXPECT_EQ(pos, 28);
}

TEST(MotionPairs, NegativesUseAnotherTrajectoryAtTheSameFrame) {
    SceneConfig c;
    Rng rng(3);
    std::vector<Trajectory> ts;
    for (int k = 0; k < 4; ++k) {
        ts.push_back(sample_trajectory(c, 12, rng));
        ts.back().identity = k;
    }
    for (const auto& p : make_motion_pairs(ts, 5, rng)) {
        const Trajectory* owner = nullptr;
        std::size_t offset = 0;
        for (const auto& t : ts) {
            for (std::size_t s = 0; s + 5 < t.positions.size(); ++s) {
                if (std::equal(p.sample.window.begin(), p.sample.window.end(), t.positions.begin() + s)) {
                    owner = &t;
                    offset = s;
                }
            }
        }
        ASSERT_NE(owner, nullptr);
        const Position next = owner->positions[offset + 5];
        if (p.label == 1) {
            EXPECT_EQ(p.sample.candidate, next);
        } else {
            bool found = false;
            for (const auto& t : ts) {
                if (&t != owner && t.positions[offset + 5] == p.sample.candidate) found = true;
            }
            EXPECT_TRUE(found);
        }
    }
}

TEST(Triplets, BatchShapeAndInvariants) {
    const Scene s = generate_scene(SceneConfig{});
    Rng rng(4);
    const TripletSampler sampler(s, 6);
    for (int b = 0; b < 20; ++b) {
        const auto batch = sampler.sample({}, rng);
        ASSERT_EQ(batch.size(), 100u);
        std::map<int, int> per_identity;
        for (const auto& t : batch) {
            ++per_identity[t.anchor.identity];
            EXPECT_EQ(t.anchor.identity, t.positive.identity);
            EXPECT_NE(t.anchor.identity, t.negative.identity);
            EXPECT_NE(t.anchor.frame, t.positive.frame);
            EXPECT_EQ(t.anchor.motion.window.size(), 6u);
            EXPECT_EQ(t.anchor.descriptor.size(), 16u);
        }
        EXPECT_EQ(per_identity.size(), 5u);
        for (const auto& [id, count] : per_identity) EXPECT_EQ(count, 20);
        EXPECT_NO_THROW(check_triplet_invariants(batch));
    }
}

TEST(Triplets, InvariantCheckerRejectsBrokenInstances) {
    const Scene s = generate_scene(SceneConfig{});
    Rng rng(5);
    auto batch = TripletSampler(s, 6).sample({}, rng);
    auto broken = batch;
    broken[3].negative.identity = broken[3].anchor.identity;
    EXPECT_THROW(check_triplet_invariants(broken), std::logic_error);
    broken = batch;
    broken[7].positive.frame = broken[7].anchor.frame;
    EXPECT_THROW(check_triplet_invariants(broken), std::logic_error);
}

TEST(Triplets, TooFewIdentitiesThrow) {
    SceneConfig c;
    c.identities = 5;
    const Scene s = generate_scene(c);
    Rng rng(6);
    EXPECT_THROW(TripletSampler(s, 6).sample({}, rng), std::invalid_argument);
}

TEST(Triplets, ShortLivedIdentitiesAreSkipped) {
    SceneConfig c = clean_scene();
    c.frames = 20;
    c.min_track_length = 2;
    c.identities = 30;
    const Scene s = generate_scene(c);
    Rng rng(7);
    const auto out = make_triplets(s, {5, 20, 2}, 6, rng);
    std::set<int> skipped(out.skipped_identities.begin(), out.skipped_identities.end());
    for (const auto& t : s.trajectories) {
        if (t.length() < 8) {
            EXPECT_TRUE(skipped.count(t.identity)) << t.identity;
        }
    }
    EXPECT_EQ(out.batches.size(), 2u);
}
