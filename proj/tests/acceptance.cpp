// Runs the acceptance criteria at their stated tolerances and prints one PASS/FAIL line each.
// Exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "support/gradient_cases.hpp"
#include "tripletrack/app/commands.hpp"
#include "tripletrack/assoc/hungarian.hpp"
#include "tripletrack/io/mot_csv.hpp"
#include "tripletrack/io/numbers.hpp"

using namespace tripletrack;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool passed = false;
    std::string detail;
};

int failures = 0;

void report(int number, const std::string& name, const Outcome& outcome) {
    std::printf("[%s] %d %s: %s\n", outcome.passed ? "PASS" : "FAIL", number, name.c_str(), outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.passed) ++failures;
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

Outcome gradient_correctness() {
    const auto start = Clock::now();
    std::vector<nn::GradCheckReport> reports;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        for (auto act : {nn::Activation::identity, nn::Activation::tanh, nn::Activation::relu}) {
            reports.push_back(checks::fc_case(seed, act));
        }
        reports.push_back(checks::lstm_cell_case(seed));
        reports.push_back(checks::lstm_sequence_case(seed, 4, 3));
        reports.push_back(checks::softmax_ce_case(seed));
        for (auto form : {nn::TripletForm::positive_negative, nn::TripletForm::anchor_negative}) {
            for (auto dist : {nn::DistanceKind::euclidean, nn::DistanceKind::squared}) {
                reports.push_back(checks::triplet_case(seed, form, dist));
            }
        }
    }
    for (std::uint64_t seed = 1; seed <= 5; ++seed) reports.push_back(checks::metric_net_case(seed));
    const double elapsed = seconds_since(start);
    double worst = 0.0;
    std::string failure;
    for (const auto& r : reports) {
        worst = std::max(worst, r.max_relative_error);
        if (!r.passed && failure.empty()) failure = r.failure;
    }
    const bool ok = failure.empty() && worst < checks::kGradTolerance && elapsed < 60.0;
    return {ok, std::to_string(reports.size()) + " checks, max relative error " + io::format_double(worst) +
                    " (< 1e-4), " + fmt(elapsed, 1) + " s (< 60 s)" + (failure.empty() ? "" : "; " + failure)};
}

Outcome assignment_oracle() {
    const auto start = Clock::now();
    int mismatches = 0;
    double worst = 0.0;
    for (std::size_t n = 1; n <= 7; ++n) {
        for (std::uint64_t k = 0; k < 1000; ++k) {
            const auto costs = checks::random_costs(n, n * 100000 + k);
            const double diff = std::abs(assoc::hungarian(costs).total_cost(costs) - checks::brute_force_minimum(costs));
            worst = std::max(worst, diff);
            if (diff > 1e-9) ++mismatches;
        }
    }
    const double elapsed = seconds_since(start);
    return {mismatches == 0 && elapsed < 30.0,
            "7000 matrices, " + std::to_string(mismatches) + " mismatches (max |diff| " + io::format_double(worst) +
                "), " + fmt(elapsed, 1) + " s (< 30 s)"};
}

Outcome golden_fixtures() {
    const auto perfect = checks::perfect_fixture();
    const auto empty = checks::empty_fixture();
    const auto switched = checks::switch_fixture();
    const auto p = eval::evaluate(perfect.ground_truth, perfect.hypotheses);
    const auto e = eval::evaluate(empty.ground_truth, empty.hypotheses);
    const auto s = eval::evaluate(switched.ground_truth, switched.hypotheses);
    const bool ok = p.mota == 1.0 && e.mota == 0.0 && e.misses == e.gt_boxes && s.id_switches == 1 && s.mota == 0.9;
    return {ok, "perfect MOTA " + io::format_double(p.mota) + ", empty MOTA " + io::format_double(e.mota) + " FN " +
                    std::to_string(e.misses) + "/" + std::to_string(e.gt_boxes) + ", switch IDS " +
                    std::to_string(s.id_switches) + " MOTA " + io::format_double(s.mota)};
}

/// Everything measured on one seed of the default configuration.
struct SeedResults {
    std::uint64_t seed = 0;
    app::SeedRun run;
    double default_seconds = 0.0;
    std::map<std::string, double> variant_mota;
    std::map<int, double> window_mota;
};

SeedResults run_seed(const app::RunConfig& base, std::uint64_t seed) {
    app::RunConfig config = base;
    config.seed = seed;
    app::SeedPipeline pipeline(config);
    SeedResults out;
    out.seed = seed;
    const auto start = Clock::now();
    out.run = pipeline.run_default();
    out.default_seconds = seconds_since(start);
    for (const auto& v : app::ablation_variants()) out.variant_mota[v.name] = pipeline.run_variant(v).mota;
    for (int n = config.evaluation.sweep_min_window; n <= config.evaluation.sweep_max_window; ++n) {
        out.window_mota[n] = pipeline.run_window(n).mota;
    }
    std::printf("  seed %llu: %.1f s default run, margin %.4f, verification %.4f, MOTA learned %.4f baseline %.4f\n",
                static_cast<unsigned long long>(seed), out.default_seconds, out.run.margin_satisfaction,
                out.run.verification_accuracy, out.run.learned.mota, out.run.baseline.mota);
    std::printf("    ablation");
    for (const auto& [name, mota] : out.variant_mota) std::printf(" %s %.4f", name.c_str(), mota);
    std::printf("\n    N-sweep");
    for (const auto& [n, mota] : out.window_mota) std::printf(" N%d %.4f", n, mota);
    std::printf("\n");
    std::fflush(stdout);
    return out;
}

double median_of(const std::vector<SeedResults>& seeds, const std::function<double(const SeedResults&)>& get) {
    std::vector<double> values;
    for (const auto& s : seeds) values.push_back(get(s));
    return app::median(values);
}

Outcome margin_satisfaction(const std::vector<SeedResults>& seeds) {
    const double med = median_of(seeds, [](const SeedResults& s) { return s.run.margin_satisfaction; });
    double slowest = 0.0;
    for (const auto& s : seeds) slowest = std::max(slowest, s.default_seconds);
    return {med >= 0.95 && slowest < 300.0, "median satisfied fraction " + fmt(med) +
                                                " (>= 0.95), slowest train+eval " + fmt(slowest, 1) + " s (< 300 s)"};
}

Outcome ablation_ordering(const std::vector<SeedResults>& seeds) {
    std::map<std::string, double> med;
    for (const auto& v : app::ablation_variants()) {
        med[v.name] = median_of(seeds, [&](const SeedResults& s) { return s.variant_mota.at(v.name); });
    }
    std::vector<std::string> broken;
    if (!(med["A+M+T"] > med["A+T"])) broken.push_back("A+M+T > A+T");
    if (!(med["A+M+T"] > med["A+M+V"])) broken.push_back("A+M+T > A+M+V");
    for (const char* channels : {"A", "M", "A+M"}) {
        const std::string t = std::string(channels) + "+T", v = std::string(channels) + "+V";
        if (!(med[t] >= med[v])) broken.push_back(t + " >= " + v);
    }
    std::string detail = "median MOTA";
    for (const auto& v : app::ablation_variants()) detail += " " + v.name + " " + fmt(med[v.name]);
    if (!broken.empty()) {
        detail += "; violated:";
        for (const auto& b : broken) detail += " [" + b + "]";
    }
    return {broken.empty(), detail};
}

Outcome window_trend(const std::vector<SeedResults>& seeds) {
    std::map<int, double> med;
    for (int n : {1, 5, 6, 8}) med[n] = median_of(seeds, [&](const SeedResults& s) { return s.window_mota.at(n); });
    const double early = med[5] - med[1];
    const double late = med[8] - med[5];
    const bool ok = med[6] >= med[1] && late <= early;
    return {ok, "median MOTA N1 " + fmt(med[1]) + " N5 " + fmt(med[5]) + " N6 " + fmt(med[6]) + " N8 " + fmt(med[8]) +
                    "; gain 1->5 " + fmt(early) + ", gain 5->8 " + fmt(late)};
}

Outcome beats_baseline(const std::vector<SeedResults>& seeds) {
    const double learned = median_of(seeds, [](const SeedResults& s) { return s.run.learned.mota; });
    const double baseline = median_of(seeds, [](const SeedResults& s) { return s.run.baseline.mota; });
    return {learned > baseline, "median MOTA learned " + fmt(learned) + " vs greedy IoU " + fmt(baseline)};
}

Outcome verification_accuracy(const std::vector<SeedResults>& seeds) {
    const double med = median_of(seeds, [](const SeedResults& s) { return s.run.verification_accuracy; });
    return {med > 0.90, "median pair accuracy " + fmt(med) + " (> 0.90)"};
}

/// Runs every command into `dir` and returns the bytes of each output file.
std::map<std::string, std::string> command_outputs(const app::RunConfig& config, const app::RunConfig& sweep_config,
                                                   const std::filesystem::path& dir) {
    const app::CommandContext ctx{config, dir, false};
    app::cmd_simulate(ctx, app::Split::test);
    app::cmd_train(ctx, app::TrainStage::id);
    app::cmd_train(ctx, app::TrainStage::motion);
    app::cmd_train(ctx, app::TrainStage::metric);
    app::cmd_track(ctx, {});
    app::TrackOptions baseline;
    baseline.baseline = true;
    app::cmd_track(ctx, baseline);
    app::cmd_evaluate(ctx, {});
    const app::CommandContext sweep_ctx{sweep_config, dir, false};
    app::cmd_sweep(sweep_ctx, app::SweepParameter::window, 1);
    app::cmd_sweep(sweep_ctx, app::SweepParameter::ablation, 1);
    std::map<std::string, std::string> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        out[entry.path().filename().string()] = io::read_text(entry.path());
    }
    return out;
}

Outcome determinism(const app::RunConfig& config) {
    const auto sweep_config = checks::quick_config();
    checks::TempDir first, second;
    const auto a = command_outputs(config, sweep_config, first.path());
    const auto b = command_outputs(config, sweep_config, second.path());
    std::vector<std::string> differing;
    for (const auto& [name, text] : a) {
        auto it = b.find(name);
        if (it == b.end() || it->second != text) differing.push_back(name);
    }
    if (a.size() != b.size()) differing.push_back("file set");

    std::vector<std::string> unstable;
    for (const char* name : {app::files::ground_truth, app::files::detections, app::files::tracks,
                             app::files::baseline_tracks}) {
        const auto& text = a.at(name);
        if (io::write_mot_csv(io::parse_mot_csv(text, name)) != text) unstable.push_back(name);
    }
    std::string detail = std::to_string(a.size()) + " output files compared, " + std::to_string(differing.size()) +
                         " differ; MOT round trip on 4 files, " + std::to_string(unstable.size()) + " unstable";
    for (const auto& d : differing) detail += " [" + d + "]";
    for (const auto& u : unstable) detail += " [" + u + "]";
    return {differing.empty() && unstable.empty() && a.size() >= 15, detail};
}

}  // namespace

int main() {
    report(1, "gradient correctness", gradient_correctness());
    report(2, "assignment oracle", assignment_oracle());
    report(3, "CLEAR-MOT golden fixtures", golden_fixtures());

    const app::RunConfig config;
    std::vector<SeedResults> seeds;
    for (auto seed : app::seed_list(config.seed, config.evaluation.seeds)) seeds.push_back(run_seed(config, seed));

    report(4, "margin satisfaction", margin_satisfaction(seeds));
    report(5, "ablation ordering", ablation_ordering(seeds));
    report(6, "window trend", window_trend(seeds));
    report(7, "tracker beats baseline", beats_baseline(seeds));
    report(8, "determinism and I/O", determinism(config));
    report(9, "verification accuracy", verification_accuracy(seeds));

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
