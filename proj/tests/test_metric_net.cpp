#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "gradient_cases.hpp"
#include "tripletrack/app/pipeline.hpp"
#include "tripletrack/metric/metric_net.hpp"
#include "tripletrack/metric/verification_net.hpp"

using namespace tripletrack;
using namespace tripletrack::metric;
using nn::Tensor;

namespace {

constexpr int kDescriptor = 6;
constexpr int kWindow = 3;

MetricNet random_net(std::uint64_t seed, ChannelConfig channels = {}) {
    Rng rng(seed);
    appearance::IdNet id({kDescriptor, 8, 8, 4});
    id.init(rng, 0.5);
    motion::PredictionNet motion({8, kWindow});
    motion.init(rng, 0.5);
    MetricNet net(id, motion, {4, channels});
    net.init_fuse(rng, 0.5);
    return net;
}

sim::TripletBundle random_bundle(Rng& rng, int identity) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> coord(-0.4, 0.4);
    sim::TripletBundle b;
    b.identity = identity;
    for (int k = 0; k < kDescriptor; ++k) b.descriptor.push_back(normal(rng));
    for (int k = 0; k < kWindow; ++k) b.motion.window.push_back({coord(rng), coord(rng)});
    b.motion.candidate = {coord(rng), coord(rng)};
    return b;
}

std::vector<sim::TripletInstance> random_triplets(std::uint64_t seed, int n) {
    Rng rng(seed);
    std::vector<sim::TripletInstance> out;
    for (int k = 0; k < n; ++k) {
        out.push_back({random_bundle(rng, 0), random_bundle(rng, 0), random_bundle(rng, 1)});
        out.back().positive.frame = 1;
    }
    return out;
}

double median_of(std::vector<double> v) { return app::median(std::move(v)); }

}  // namespace

TEST(MetricNet, EmbeddingHasWidthK) {
    const MetricNet net = random_net(1);
    Rng rng(2);
    const auto b = random_bundle(rng, 0);
    const auto e = embed(net, b.descriptor, b.motion.window, b.motion.candidate);
    EXPECT_EQ(e.size(), 4u);
    for (double v : e) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_LE(std::abs(v), 1.0);
    }
    EXPECT_EQ(net.joint.width(), 16u);
}

TEST(MetricNet, EmbeddingIsDeterministic) {
    const MetricNet net = random_net(3);
    Rng rng(4);
    const auto b = random_bundle(rng, 0);
    EXPECT_EQ(embed(net, b.descriptor, b.motion.window, b.motion.candidate),
              embed(net, b.descriptor, b.motion.window, b.motion.candidate));
}

TEST(MetricNet, DimensionMismatchThrows) {
    const MetricNet net = random_net(5);
    Rng rng(6);
    auto b = random_bundle(rng, 0);
    b.descriptor.pop_back();
    EXPECT_THROW(embed(net, b.descriptor, b.motion.window, b.motion.candidate), std::invalid_argument);
    b = random_bundle(rng, 0);
    b.motion.window.pop_back();
    EXPECT_THROW(embed(net, b.descriptor, b.motion.window, b.motion.candidate), std::invalid_argument);
}

TEST(MetricNet, ChannelsShareOneFunction) {
    const MetricNet net = random_net(7);
    const auto triplets = random_triplets(8, 6);
    const auto ch = stack_triplets(triplets, kWindow);
    const Tensor ea = net.embed(ch.anchor), ep = net.embed(ch.positive), en = net.embed(ch.negative);
    // Route the bundles through the channels in a different order and recombine.
    std::vector<sim::TripletInstance> rotated;
    for (const auto& t : triplets) rotated.push_back({t.negative, t.anchor, t.positive});
    const auto rc = stack_triplets(rotated, kWindow);
    const Tensor ra = net.embed(rc.positive), rp = net.embed(rc.negative), rn = net.embed(rc.anchor);
    EXPECT_EQ(ea, ra);
    EXPECT_EQ(ep, rp);
    EXPECT_EQ(en, rn);
    const nn::TripletConfig config;
    EXPECT_EQ(nn::triplet_hinge_loss(ea, ep, en, config).loss, nn::triplet_hinge_loss(ra, rp, rn, config).loss);
}

TEST(MetricNet, SingleChannelWidths) {
    EXPECT_EQ(random_net(9, {true, false}).joint.width(), 8u);
    EXPECT_EQ(random_net(9, {false, true}).joint.width(), 8u);
    EXPECT_THROW(random_net(9, {false, false}), std::invalid_argument);
}

TEST(MetricNet, DisabledChannelHasNoParameters) {
    MetricNet net = random_net(10, {true, false});
    for (const auto* p : net.params()) EXPECT_EQ(p->name.rfind("motion.", 0), std::string::npos) << p->name;
}

TEST(MarginSatisfaction, VacuousMarginIsAlwaysMet) {
    const MetricNet net = random_net(11);
    EXPECT_DOUBLE_EQ(margin_satisfaction(net, random_triplets(12, 50), 1e9), 1.0);
}

TEST(MarginSatisfaction, RandomNetsRarelyMeetTheMargin) {
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        total += margin_satisfaction(random_net(100 + seed), random_triplets(200 + seed, 50), -2.0);
    }
    EXPECT_LT(total / 20.0, 0.5);
}

TEST(MarginSatisfaction, EmptySetThrows) {
    EXPECT_THROW(margin_satisfaction(random_net(13), {}, -2.0), std::invalid_argument);
}

TEST(MetricNet, CheckpointRoundTripIsBitwise) {
    MetricNet net = random_net(14);
    const auto text = metric_checkpoint(net).serialize();
    const MetricNet back = metric_net_from_checkpoint(nn::Checkpoint::parse(text));
    const auto ch = stack_triplets(random_triplets(15, 5), kWindow);
    EXPECT_EQ(net.embed(ch.anchor), back.embed(ch.anchor));
    EXPECT_EQ(net.config().channels.appearance, back.config().channels.appearance);
}

TEST(MetricNet, NonNegativeTauWarns) {
    const auto config = checks::quick_config();
    const auto scene = app::make_scene(config, app::Split::train);
    Rng rng(16);
    appearance::IdNet id(config.id);
    id.init(rng);
    motion::PredictionNet motion(config.motion);
    motion.init(rng, 0.3);
    MetricTrainConfig train = config.metric_train;
    train.iterations = 2;
    train.triplet.tau = 0.5;
    const sim::TripletSampler sampler(scene, config.motion.window);
    ::testing::internal::CaptureStderr();
    train_metric_net(id, motion, sampler, config.metric, train, rng);
    const std::string err = ::testing::internal::GetCapturedStderr();
    EXPECT_NE(err.find("tau"), std::string::npos) << err;
}

TEST(MetricNet, SamplerWindowMustMatch) {
    const auto config = checks::quick_config();
    const auto scene = app::make_scene(config, app::Split::train);
    Rng rng(17);
    const sim::TripletSampler sampler(scene, config.motion.window + 1);
    EXPECT_THROW(train_metric_net(appearance::IdNet(config.id), motion::PredictionNet(config.motion), sampler,
                                  config.metric, config.metric_train, rng),
                 std::invalid_argument);
}

TEST(MetricNet, TrainingSeparatesIdentities) {
    auto config = checks::quick_config();
    config.metric_train.iterations = 150;
    app::SeedPipeline pipeline(config);
    const auto& net = pipeline.metric_net(config.motion.window);
    const auto held_out = app::held_out_triplets(config, pipeline.scene(app::Split::validation));
    const auto d = triplet_distances(net, held_out);
    EXPECT_LT(median_of(d.same), median_of(d.different));

    nn::TrainLog log;
    app::train_metric_stage(config, pipeline.id_net(), pipeline.motion_net(config.motion.window),
                            pipeline.scene(app::Split::train), &log);
    ASSERT_EQ(log.size(), 15u);
    EXPECT_LT(log.back().loss, log.front().loss);
}

TEST(MetricNet, TrainingIsDeterministicPerSeed) {
    auto config = checks::quick_config();
    config.metric_train.iterations = 5;
    app::SeedPipeline a(config), b(config);
    MetricNet na = a.metric_net(config.motion.window);
    MetricNet nb = b.metric_net(config.motion.window);
    EXPECT_EQ(metric_checkpoint(na).serialize(), metric_checkpoint(nb).serialize());
}

TEST(VerificationNet, HeadGradientsMatchFiniteDifferences) {
    Rng rng(18);
    appearance::IdNet id({kDescriptor, 8, 8, 4});
    id.init(rng, 0.5);
    motion::PredictionNet motion({8, kWindow});
    motion.init(rng, 0.5);
    VerificationNet net(id, motion, {6, {}});
    net.init_head(rng, 0.5);
    const auto triplets = random_triplets(19, 4);
    const auto ch = stack_triplets(triplets, kWindow);
    const std::vector<int> labels{1, 0, 1, 0};
    const auto report = nn::grad_check(
        [&] {
            const Tensor logits = net.head_logits(net.joint.forward(ch.anchor), net.joint.forward(ch.negative));
            return nn::softmax_cross_entropy(logits, labels).loss;
        },
        [&] {
            JointFeatures::Cache ca, cn;
            const Tensor fa = net.joint.forward(ch.anchor, &ca);
            const Tensor fn = net.joint.forward(ch.negative, &cn);
            VerificationNet::HeadCache hc;
            const auto ce = nn::softmax_cross_entropy(net.head_logits(fa, fn, &hc), labels);
            const auto g = net.head_backward(hc, ce.grad);
            net.joint.backward(ca, g.first);
            net.joint.backward(cn, g.second);
        },
        net.params(), checks::kGradTolerance);
    EXPECT_TRUE(report.passed) << report.failure;
}

TEST(VerificationNet, PairOrderDoesNotMatter) {
    Rng rng(20);
    appearance::IdNet id({kDescriptor, 8, 8, 4});
    id.init(rng, 0.5);
    motion::PredictionNet motion({8, kWindow});
    motion.init(rng, 0.5);
    VerificationNet net(id, motion, {6, {}});
    net.init_head(rng, 0.5);
    const auto ch = stack_triplets(random_triplets(21, 4), kWindow);
    const Tensor a = net.joint.forward(ch.anchor), b = net.joint.forward(ch.negative);
    const auto p = net.same_probability(a, b);
    const auto q = net.same_probability(b, a);
    for (std::size_t k = 0; k < p.size(); ++k) {
        EXPECT_DOUBLE_EQ(p[k], q[k]);
        EXPECT_GE(p[k], 0.0);
        EXPECT_LE(p[k], 1.0);
    }
}
