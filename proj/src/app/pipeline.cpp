#include "tripletrack/app/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tripletrack::app {

sim::SceneConfig scene_config(const RunConfig& config, Split split) {
    sim::SceneConfig sc = config.scene;
    sc.appearance_seed = derive_seed(config.seed, 0);
    sc.seed = derive_seed(config.seed, 1 + static_cast<std::uint64_t>(split));
    return sc;
}

sim::Scene make_scene(const RunConfig& config, Split split) { return sim::generate_scene(scene_config(config, split)); }

Rng stage_rng(const RunConfig& config, Stage stage) {
    return Rng(derive_seed(config.seed, static_cast<std::uint64_t>(stage)));
}

std::vector<appearance::LabeledDescriptor> labeled_descriptors(const sim::Scene& scene) {
    std::vector<appearance::LabeledDescriptor> out;
    for (const auto& d : scene.detections) {
        if (d.truth_id) out.push_back({d.descriptor, *d.truth_id});
    }
    return out;
}

appearance::IdNet train_id_stage(const RunConfig& config, const sim::Scene& train_scene, nn::TrainLog* log) {
    Rng rng = stage_rng(config, Stage::id_training);
    const auto samples = labeled_descriptors(train_scene);
    return appearance::train_id_net(samples, config.id, config.id_train, rng, log);
}

MotionData motion_data(const RunConfig& config) {
    Rng rng = stage_rng(config, Stage::motion_data);
    const auto& md = config.motion_data;
    const int total = md.groups + md.validation_groups;
    auto groups = sim::sample_trajectory_groups(config.scene, total, md.group_size, md.length, md.group_radius, rng);
    for (auto& g : groups) {
        for (auto& t : g) sim::jitter_positions(t, md.jitter, rng);
    }
    Rng pair_rng(derive_seed(config.seed, static_cast<std::uint64_t>(Stage::motion_data) * 100 +
                                              static_cast<std::uint64_t>(config.motion.window)));
    MotionData out;
    for (int g = 0; g < total; ++g) {
        auto pairs = sim::make_motion_pairs(groups[static_cast<std::size_t>(g)], config.motion.window, pair_rng);
        auto& dst = g < md.groups ? out.train : out.validation;
        dst.insert(dst.end(), std::make_move_iterator(pairs.begin()), std::make_move_iterator(pairs.end()));
    }
    return out;
}

motion::PredictionNet train_motion_stage(const RunConfig& config, nn::TrainLog* log) {
    const auto data = motion_data(config);
    Rng rng = stage_rng(config, Stage::motion_training);
    return motion::train_prediction_net(data.train, data.validation, config.motion, config.motion_train, rng, log);
}

metric::MetricNet train_metric_stage(const RunConfig& config, const appearance::IdNet& id,
                                     const motion::PredictionNet& motion, const sim::Scene& train_scene,
                                     nn::TrainLog* log) {
    Rng rng = stage_rng(config, Stage::metric_training);
    const sim::TripletSampler sampler(train_scene, config.motion.window);
    return metric::train_metric_net(id, motion, sampler, config.metric, config.metric_train, rng, log);
}

metric::VerificationNet train_verification_stage(const RunConfig& config, const appearance::IdNet& id,
                                                 const motion::PredictionNet& motion, const sim::Scene& train_scene,
                                                 nn::TrainLog* log) {
    Rng rng = stage_rng(config, Stage::metric_training);
    const sim::TripletSampler sampler(train_scene, config.motion.window);
    metric::VerificationNetConfig vc;
    vc.hidden_dim = config.verification_hidden;
    vc.channels = config.metric.channels;
    return metric::train_verification_net(id, motion, sampler, vc, config.metric_train, rng, log);
}

std::vector<sim::TripletInstance> held_out_triplets(const RunConfig& config, const sim::Scene& scene) {
    Rng rng = stage_rng(config, Stage::held_out);
    const sim::TripletSampler sampler(scene, config.motion.window);
    std::vector<sim::TripletInstance> out;
    for (int b = 0; b < config.evaluation.held_out_batches; ++b) {
        auto batch = sampler.sample(config.metric_train.batch, rng);
        out.insert(out.end(), std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
    }
    return out;
}

namespace {

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace

double balanced_threshold(std::span<const double> same, std::span<const double> different) {
    if (same.empty() || different.empty()) throw std::invalid_argument("balanced_threshold: empty cost set");
    std::vector<std::pair<double, bool>> all;
    all.reserve(same.size() + different.size());
    for (double c : same) all.emplace_back(c, true);
    for (double c : different) all.emplace_back(c, false);
    std::sort(all.begin(), all.end());
    const double ns = static_cast<double>(same.size());
    const double nd = static_cast<double>(different.size());
    // Accepting nothing scores 0.5; the threshold then sits below every cost.
    double best = 0.5;
    double threshold = all.front().first - 1.0;
    double accepted_same = 0.0, accepted_different = 0.0;
    for (std::size_t k = 0; k < all.size(); ++k) {
        (all[k].second ? accepted_same : accepted_different) += 1.0;
        if (k + 1 < all.size() && all[k + 1].first == all[k].first) continue;
        const double score = 0.5 * (accepted_same / ns + 1.0 - accepted_different / nd);
        if (score > best) {
            best = score;
            threshold = k + 1 < all.size() ? 0.5 * (all[k].first + all[k + 1].first) : all[k].first;
        }
    }
    return threshold;
}

metric::TripletDistances verification_costs(const metric::VerificationNet& net,
                                            std::span<const sim::TripletInstance> triplets) {
    const auto channels = metric::stack_triplets(triplets, net.joint.window());
    const auto anchor = net.joint.forward(channels.anchor);
    const auto positive = net.joint.forward(channels.positive);
    const auto negative = net.joint.forward(channels.negative);
    metric::TripletDistances out;
    for (double p : net.same_probability(anchor, positive)) out.same.push_back(1.0 - p);
    for (double p : net.same_probability(positive, negative)) out.different.push_back(1.0 - p);
    return out;
}

double calibrate_gate(const TrackerSettings& tracker, const metric::TripletDistances& costs, double fixed) {
    switch (tracker.gate_rule) {
        case GateRule::balanced: return std::max(0.0, balanced_threshold(costs.same, costs.different));
        case GateRule::percentile: return quantile(costs.same, tracker.gate_percentile);
        case GateRule::fixed: return fixed;
    }
    return fixed;
}

double verification_accuracy(const RunConfig& config, const appearance::IdNet& id, const sim::Scene& scene) {
    const auto samples = labeled_descriptors(scene);
    if (samples.size() < 2) throw std::invalid_argument("verification_accuracy: scene has fewer than two detections");
    std::vector<appearance::AppearanceFeature> features;
    features.reserve(samples.size());
    for (const auto& s : samples) features.push_back(appearance::appearance_feature(id, s.descriptor));

    std::map<int, std::vector<std::size_t>> by_identity;
    for (std::size_t k = 0; k < samples.size(); ++k) by_identity[samples[k].label].push_back(k);
    std::vector<int> identities;
    for (const auto& [label, list] : by_identity) {
        if (list.size() >= 2) identities.push_back(label);
    }
    if (identities.empty() || by_identity.size() < 2) {
        throw std::invalid_argument("verification_accuracy: need two identities and one with two detections");
    }

    Rng rng = stage_rng(config, Stage::verification_pairs);
    std::uniform_int_distribution<std::size_t> any(0, samples.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_identity(0, identities.size() - 1);
    const double threshold = config.evaluation.verification_threshold;
    std::size_t correct = 0;
    for (int k = 0; k < config.evaluation.verification_positive_pairs; ++k) {
        const auto& list = by_identity[identities[pick_identity(rng)]];
        std::uniform_int_distribution<std::size_t> pick(0, list.size() - 1);
        const std::size_t a = list[pick(rng)];
        std::size_t b = list[pick(rng)];
        while (b == a) b = list[pick(rng)];
        if (appearance::verify_pair(features[a], features[b], threshold)) ++correct;
    }
    for (int k = 0; k < config.evaluation.verification_negative_pairs; ++k) {
        const std::size_t a = any(rng);
        std::size_t b = any(rng);
        while (samples[b].label == samples[a].label) b = any(rng);
        if (!appearance::verify_pair(features[a], features[b], threshold)) ++correct;
    }
    return static_cast<double>(correct) /
           static_cast<double>(config.evaluation.verification_positive_pairs +
                               config.evaluation.verification_negative_pairs);
}

assoc::TrackingResult track_scene(const RunConfig& config, const sim::Scene& scene,
                                  const assoc::AffinityModel& affinity) {
    return assoc::run_tracker(scene.detections, affinity, config.tracker.lifecycle, 1, scene.config.frames);
}

eval::MotReport evaluate_scene(const RunConfig& config, const sim::Scene& scene,
                               std::span<const assoc::TrackRow> rows) {
    const auto gt = io::box_rows(io::ground_truth_rows(scene, config.image));
    const auto hyp = io::box_rows(io::track_rows(rows, config.image));
    return eval::evaluate(gt, hyp, config.evaluation.iou_threshold);
}

assoc::EmbeddingGate embedding_gate(const RunConfig& config, const metric::MetricNet& net,
                                    const sim::Scene& validation_scene) {
    assoc::EmbeddingGate gate = config.tracker.gate;
    if (config.tracker.gate_rule != GateRule::fixed) {
        RunConfig c = config;
        c.motion.window = net.joint.window();
        const auto costs = metric::triplet_distances(net, held_out_triplets(c, validation_scene));
        gate.gate = calibrate_gate(config.tracker, costs, gate.gate);
    }
    return gate;
}

assoc::EmbeddingGate verification_gate(const RunConfig& config, const metric::VerificationNet& net,
                                       const sim::Scene& validation_scene) {
    assoc::EmbeddingGate gate = config.tracker.gate;
    gate.gate = config.tracker.verification_gate;
    if (config.tracker.gate_rule != GateRule::fixed) {
        RunConfig c = config;
        c.motion.window = net.joint.window();
        const auto costs = verification_costs(net, held_out_triplets(c, validation_scene));
        gate.gate = calibrate_gate(config.tracker, costs, gate.gate);
    }
    return gate;
}

const std::vector<AblationVariant>& ablation_variants() {
    static const std::vector<AblationVariant> variants{
        {"A+T", true, false, true},  {"M+T", false, true, true},  {"A+M+T", true, true, true},
        {"A+V", true, false, false}, {"M+V", false, true, false}, {"A+M+V", true, true, false},
    };
    return variants;
}

SeedPipeline::SeedPipeline(RunConfig config) : config_(std::move(config)) { config_.validate(); }

RunConfig SeedPipeline::with_window(int window) const {
    RunConfig c = config_;
    c.motion.window = window;
    return c;
}

const sim::Scene& SeedPipeline::scene(Split split) {
    auto& slot = scenes_[static_cast<std::size_t>(split)];
    if (!slot) slot = make_scene(config_, split);
    return *slot;
}

const appearance::IdNet& SeedPipeline::id_net() {
    if (!id_) id_ = train_id_stage(config_, scene(Split::train), &id_log_);
    return *id_;
}

const motion::PredictionNet& SeedPipeline::motion_net(int window) {
    auto it = motion_.find(window);
    if (it == motion_.end()) {
        it = motion_.emplace(window, train_motion_stage(with_window(window), &motion_logs_[window])).first;
    }
    return it->second;
}

const metric::MetricNet& SeedPipeline::metric_net(int window) {
    auto it = metric_.find(window);
    if (it == metric_.end()) {
        const auto& id = id_net();
        const auto& motion = motion_net(window);
        it = metric_
                 .emplace(window, train_metric_stage(with_window(window), id, motion, scene(Split::train),
                                                     &metric_logs_[window]))
                 .first;
    }
    return it->second;
}

const std::vector<sim::TripletInstance>& SeedPipeline::held_out(int window) {
    auto it = held_out_.find(window);
    if (it == held_out_.end()) {
        it = held_out_.emplace(window, held_out_triplets(with_window(window), scene(Split::validation))).first;
    }
    return it->second;
}

eval::MotReport SeedPipeline::run_baseline() {
    const assoc::IouAffinity affinity(config_.tracker.baseline_min_iou);
    RunConfig c = config_;
    c.tracker.lifecycle.matcher = assoc::Matcher::greedy;
    const auto& test = scene(Split::test);
    const auto result = track_scene(c, test, affinity);
    return evaluate_scene(c, test, result.rows);
}

eval::MotReport SeedPipeline::run_window(int window) {
    const auto& net = metric_net(window);
    const auto gate = embedding_gate(with_window(window), net, scene(Split::validation));
    const assoc::EmbeddingAffinity affinity(net, gate);
    const auto& test = scene(Split::test);
    const auto result = track_scene(config_, test, affinity);
    return evaluate_scene(config_, test, result.rows);
}

SeedRun SeedPipeline::run_default() {
    const int window = config_.motion.window;
    SeedRun run;
    run.seed = config_.seed;
    const auto& id = id_net();
    run.id_validation_accuracy = appearance::classification_accuracy(id, labeled_descriptors(scene(Split::validation)));
    run.verification_accuracy = verification_accuracy(config_, id, scene(Split::validation));
    motion_net(window);
    const auto& mlog = motion_logs_[window];
    run.motion_validation_accuracy = mlog.empty() ? 0.0 : mlog.back().accuracy;
    const auto& net = metric_net(window);
    const auto& tlog = metric_logs_[window];
    if (!tlog.empty()) {
        run.metric_initial_loss = tlog.front().loss;
        run.metric_final_loss = tlog.back().loss;
    }
    run.margin_satisfaction = metric::margin_satisfaction(net, held_out(window), config_.metric_train.triplet.tau,
                                                          config_.metric_train.triplet.form);
    run.gate = embedding_gate(config_, net, scene(Split::validation)).gate;
    run.learned = run_window(window);
    run.baseline = run_baseline();
    return run;
}

eval::MotReport SeedPipeline::run_variant(const AblationVariant& variant) {
    const int window = config_.motion.window;
    RunConfig c = config_;
    c.metric.channels = {variant.appearance, variant.motion};
    const auto& test = scene(Split::test);
    if (variant.triplet) {
        if (variant.appearance == config_.metric.channels.appearance && variant.motion == config_.metric.channels.motion) {
            return run_window(window);
        }
        const auto net = train_metric_stage(c, id_net(), motion_net(window), scene(Split::train));
        const assoc::EmbeddingAffinity affinity(net, embedding_gate(c, net, scene(Split::validation)));
        return evaluate_scene(c, test, track_scene(c, test, affinity).rows);
    }
    const auto net = train_verification_stage(c, id_net(), motion_net(window), scene(Split::train));
    const assoc::VerificationAffinity affinity(net, verification_gate(c, net, scene(Split::validation)));
    return evaluate_scene(c, test, track_scene(c, test, affinity).rows);
}

std::vector<std::uint64_t> seed_list(std::uint64_t first, int count) {
    std::vector<std::uint64_t> out;
    for (int k = 0; k < count; ++k) out.push_back(first + static_cast<std::uint64_t>(k));
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace tripletrack::app
