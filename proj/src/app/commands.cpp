#include "tripletrack/app/commands.hpp"

#include <sstream>

#include "tripletrack/io/numbers.hpp"
#include "tripletrack/nn/training_log.hpp"

namespace tripletrack::app {

namespace fs = std::filesystem;

namespace {

void ensure_writable(const CommandContext& ctx, std::initializer_list<const char*> names) {
    if (ctx.force) return;
    for (const char* name : names) {
        const fs::path path = ctx.out / name;
        if (fs::exists(path)) {
            throw std::runtime_error(path.string() + " already exists; pass --force to overwrite");
        }
    }
}

void write(const CommandContext& ctx, const char* name, const std::string& text) {
    io::write_text(ctx.out / name, text, ctx.force);
}

nn::Checkpoint require_checkpoint(const CommandContext& ctx, const char* name, const char* stage) {
    const fs::path path = ctx.out / name;
    if (!fs::exists(path)) {
        throw MissingPrerequisite(path.string() + " not found; run `train --stage " + stage + "` first");
    }
    return nn::Checkpoint::load(path);
}

std::string report_fields(const eval::MotReport& r) {
    std::ostringstream os;
    os << io::format_double(r.mota) << ',' << io::format_double(r.motp) << ',' << r.false_positives << ','
       << r.misses << ',' << r.id_switches << ',' << r.fragmentations << ',' << io::format_double(r.mostly_tracked) << ','
       << io::format_double(r.mostly_lost);
    return os.str();
}

constexpr const char* kReportColumns = "mota,motp,fp,fn,ids,fm,mt,ml";

}  // namespace

Split parse_split(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "validation") return Split::validation;
    if (name == "test") return Split::test;
    throw std::invalid_argument("unknown split '" + name + "' (expected train, validation or test)");
}

const char* split_name(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "?";
}

void cmd_simulate(const CommandContext& ctx, Split split) {
    ensure_writable(ctx, {files::ground_truth, files::detections, files::descriptors});
    const auto scene = make_scene(ctx.config, split);
    const auto gt = io::ground_truth_rows(scene, ctx.config.image);
    const auto det = io::detection_rows(scene.detections, ctx.config.image);
    write(ctx, files::ground_truth, io::write_mot_csv(gt));
    write(ctx, files::detections, io::write_mot_csv(det));
    write(ctx, files::descriptors, io::write_descriptor_csv(scene.detections));
}

TrainStage parse_train_stage(const std::string& name) {
    if (name == "id") return TrainStage::id;
    if (name == "motion") return TrainStage::motion;
    if (name == "metric") return TrainStage::metric;
    throw std::invalid_argument("unknown stage '" + name + "' (expected id, motion or metric)");
}

void cmd_train(const CommandContext& ctx, TrainStage stage) {
    const RunConfig& config = ctx.config;
    nn::TrainLog log;
    switch (stage) {
        case TrainStage::id: {
            ensure_writable(ctx, {files::id_checkpoint, files::id_log});
            auto net = train_id_stage(config, make_scene(config, Split::train), &log);
            write(ctx, files::id_checkpoint, metric::id_net_checkpoint(net).serialize());
            write(ctx, files::id_log, nn::training_log_csv(log));
            return;
        }
        case TrainStage::motion: {
            ensure_writable(ctx, {files::motion_checkpoint, files::motion_log});
            auto net = train_motion_stage(config, &log);
            write(ctx, files::motion_checkpoint, metric::prediction_net_checkpoint(net).serialize());
            write(ctx, files::motion_log, nn::training_log_csv(log));
            return;
        }
        case TrainStage::metric: {
            const auto id = metric::id_net_from_checkpoint(require_checkpoint(ctx, files::id_checkpoint, "id"));
            const auto motion =
                metric::prediction_net_from_checkpoint(require_checkpoint(ctx, files::motion_checkpoint, "motion"));
            if (motion.config().window != config.motion.window) {
                throw std::invalid_argument("motion checkpoint has window " + std::to_string(motion.config().window) +
                                            " but motion.window is " + std::to_string(config.motion.window) +
                                            "; rerun `train --stage motion`");
            }
            if (id.config().descriptor_dim != config.scene.descriptor_dim) {
                throw std::invalid_argument("id checkpoint descriptor size differs from scene.descriptor_dim; "
                                            "rerun `train --stage id`");
            }
            ensure_writable(ctx, {files::metric_checkpoint, files::metric_log});
            auto net = train_metric_stage(config, id, motion, make_scene(config, Split::train), &log);
            write(ctx, files::metric_checkpoint, metric::metric_checkpoint(net).serialize());
            write(ctx, files::metric_log, nn::training_log_csv(log));
            return;
        }
    }
}

void cmd_track(const CommandContext& ctx, const TrackOptions& options) {
    const RunConfig& config = ctx.config;
    const char* output = options.baseline ? files::baseline_tracks : files::tracks;
    ensure_writable(ctx, {output});
    const fs::path det_path = options.detections.value_or(ctx.out / files::detections);
    const fs::path desc_path = options.descriptors.value_or(ctx.out / files::descriptors);
    const auto rows = io::parse_mot_csv(io::read_text(det_path), det_path.string());
    const auto detections = io::detections_from_rows(rows, io::read_text(desc_path), config.image, desc_path.string());

    assoc::TrackingResult result;
    if (options.baseline) {
        assoc::TrackerConfig lifecycle = config.tracker.lifecycle;
        lifecycle.matcher = assoc::Matcher::greedy;
        const assoc::IouAffinity affinity(config.tracker.baseline_min_iou);
        result = assoc::run_tracker(detections, affinity, lifecycle);
    } else {
        const fs::path ckpt = options.checkpoint.value_or(ctx.out / files::metric_checkpoint);
        if (!fs::exists(ckpt)) {
            throw MissingPrerequisite(ckpt.string() + " not found; run `train --stage metric` first");
        }
        const auto net = metric::metric_net_from_checkpoint(nn::Checkpoint::load(ckpt));
        RunConfig c = config;
        c.motion.window = net.joint.window();
        const auto gate = embedding_gate(c, net, make_scene(c, Split::validation));
        const assoc::EmbeddingAffinity affinity(net, gate);
        result = assoc::run_tracker(detections, affinity, config.tracker.lifecycle);
    }
    write(ctx, output, io::write_mot_csv(io::track_rows(result.rows, config.image)));
}

eval::MotReport cmd_evaluate(const CommandContext& ctx, const EvaluateOptions& options) {
    ensure_writable(ctx, {files::metrics_csv, files::metrics_text});
    const fs::path gt_path = options.ground_truth.value_or(ctx.out / files::ground_truth);
    const fs::path result_path = options.result.value_or(ctx.out / files::tracks);
    const auto gt = io::parse_mot_csv(io::read_text(gt_path), gt_path.string());
    const auto hyp = io::parse_mot_csv(io::read_text(result_path), result_path.string());
    const double threshold = options.threshold.value_or(ctx.config.evaluation.iou_threshold);
    const auto report = eval::evaluate(io::box_rows(gt), io::box_rows(hyp), threshold);
    write(ctx, files::metrics_csv, eval::report_csv(report));
    write(ctx, files::metrics_text, eval::report_table(report));
    return report;
}

SweepParameter parse_sweep_parameter(const std::string& name) {
    if (name == "N") return SweepParameter::window;
    if (name == "ablation") return SweepParameter::ablation;
    throw std::invalid_argument("unknown sweep parameter '" + name + "' (expected N or ablation)");
}

std::string cmd_sweep(const CommandContext& ctx, SweepParameter parameter, int seeds) {
    if (seeds <= 0) throw std::invalid_argument("--seeds must be positive");
    const char* output = parameter == SweepParameter::window ? files::sweep_window : files::sweep_ablation;
    ensure_writable(ctx, {output});
    std::ostringstream os;
    os << (parameter == SweepParameter::window ? "seed,N," : "seed,variant,") << kReportColumns << '\n';
    for (const auto seed : seed_list(ctx.config.seed, seeds)) {
        RunConfig c = ctx.config;
        c.seed = seed;
        SeedPipeline pipeline(c);
        if (parameter == SweepParameter::window) {
            for (int n = c.evaluation.sweep_min_window; n <= c.evaluation.sweep_max_window; ++n) {
                os << seed << ',' << n << ',' << report_fields(pipeline.run_window(n)) << '\n';
            }
        } else {
            for (const auto& variant : ablation_variants()) {
                os << seed << ',' << variant.name << ',' << report_fields(pipeline.run_variant(variant)) << '\n';
            }
        }
    }
    const std::string text = os.str();
    write(ctx, output, text);
    return text;
}

}  // namespace tripletrack::app
