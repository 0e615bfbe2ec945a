#include <CLI11.hpp>

#include <iostream>

#include "tripletrack/app/commands.hpp"
#include "tripletrack/nn/training_log.hpp"

namespace app = tripletrack::app;

int main(int argc, char** argv) {
    CLI::App cli{"Multi-object tracking with a learned appearance and motion metric"};
    cli.fallthrough();
    cli.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    bool force = false;
    cli.add_option("--config", config_path, "Configuration file ([section] key = value)")->check(CLI::ExistingFile);
    cli.add_option("--seed", seed, "Run seed (overrides run.seed)");
    cli.add_option("--out", out, "Output directory")->capture_default_str();
    cli.add_flag("--force", force, "Overwrite existing outputs");

    auto* simulate = cli.add_subcommand("simulate", "Write ground truth, detections and descriptors of a scene");
    std::string split = "test";
    simulate->add_option("--split", split, "Scene split")
        ->check(CLI::IsMember({"train", "validation", "test"}))
        ->capture_default_str();

    auto* train = cli.add_subcommand("train", "Train one network stage (id, then motion, then metric)");
    std::string stage;
    train->add_option("--stage", stage, "Stage to train")->required()->check(CLI::IsMember({"id", "motion", "metric"}));

    auto* track = cli.add_subcommand("track", "Track a detection file");
    app::TrackOptions track_options;
    track->add_option("--detections", track_options.detections, "Detections in MOT CSV form");
    track->add_option("--descriptors", track_options.descriptors, "Descriptor sidecar of the detections");
    track->add_option("--checkpoint", track_options.checkpoint, "Metric network checkpoint");
    track->add_flag("--baseline", track_options.baseline, "Greedy IoU matching instead of the learned metric");

    auto* evaluate = cli.add_subcommand("evaluate", "CLEAR-MOT metrics of a tracking result");
    app::EvaluateOptions eval_options;
    evaluate->add_option("--gt", eval_options.ground_truth, "Ground truth in MOT CSV form");
    evaluate->add_option("--result", eval_options.result, "Tracking result in MOT CSV form");
    evaluate->add_option("--threshold", eval_options.threshold, "IoU threshold for a match (default 0.5)")
        ->check(CLI::Range(0.0, 1.0));

    auto* sweep = cli.add_subcommand("sweep", "Window-length sweep or loss/channel ablation");
    std::string parameter;
    int seeds = 1;
    sweep->add_option("--parameter", parameter, "N or ablation")->required()->check(CLI::IsMember({"N", "ablation"}));
    sweep->add_option("--seeds", seeds, "Number of consecutive seeds")->check(CLI::PositiveNumber)->capture_default_str();

    CLI11_PARSE(cli, argc, argv);

    try {
        app::CommandContext ctx;
        ctx.config = config_path.empty() ? app::RunConfig{} : app::load_config(config_path);
        if (seed) ctx.config.seed = *seed;
        ctx.config.validate();
        ctx.out = out;
        ctx.force = force;

        if (simulate->parsed()) {
            app::cmd_simulate(ctx, app::parse_split(split));
        } else if (train->parsed()) {
            app::cmd_train(ctx, app::parse_train_stage(stage));
        } else if (track->parsed()) {
            app::cmd_track(ctx, track_options);
        } else if (evaluate->parsed()) {
            std::cout << tripletrack::eval::report_table(app::cmd_evaluate(ctx, eval_options));
        } else if (sweep->parsed()) {
            std::cout << app::cmd_sweep(ctx, app::parse_sweep_parameter(parameter), seeds);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
