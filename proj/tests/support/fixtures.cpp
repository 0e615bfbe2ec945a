#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <random>

#include <unistd.h>

#include "tripletrack/nn/param.hpp"

namespace tripletrack::checks {

namespace {

eval::BoxRow box_at(int frame, int id, double left) { return {frame, id, {left, 100.0, 40.0, 100.0}}; }

}  // namespace

MotFixture perfect_fixture() {
    MotFixture f{"perfect tracker", {}, {}};
    for (int frame = 1; frame <= 10; ++frame) {
        f.ground_truth.push_back(box_at(frame, 1, 10.0 * frame));
        f.ground_truth.push_back(box_at(frame, 2, 500.0 - 10.0 * frame));
        f.hypotheses.push_back(box_at(frame, 7, 10.0 * frame));
        f.hypotheses.push_back(box_at(frame, 9, 500.0 - 10.0 * frame));
    }
    return f;
}

MotFixture empty_fixture() {
    MotFixture f{"empty tracker", {}, {}};
    for (int frame = 1; frame <= 10; ++frame) f.ground_truth.push_back(box_at(frame, 1, 10.0 * frame));
    return f;
}

MotFixture switch_fixture() {
    MotFixture f{"single id switch", {}, {}};
    for (int frame = 1; frame <= 10; ++frame) {
        f.ground_truth.push_back(box_at(frame, 1, 10.0 * frame));
        f.hypotheses.push_back(box_at(frame, frame < 6 ? 1 : 2, 10.0 * frame));
    }
    return f;
}

double brute_force_minimum(const assoc::CostMatrix& costs) {
    std::vector<std::size_t> perm(costs.rows());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t r = 0; r < perm.size(); ++r) total += costs(r, perm[r]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

assoc::CostMatrix random_costs(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    assoc::CostMatrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) m.set(r, c, u(rng));
    }
    return m;
}

app::RunConfig quick_config() {
    app::RunConfig c;
    c.scene.identities = 8;
    c.scene.frames = 80;
    c.scene.min_track_length = 30;
    c.id.identities = c.scene.identities;
    c.id_train.iterations = 300;
    c.motion_train.iterations = 300;
    c.motion_data.groups = 30;
    c.motion_data.validation_groups = 5;
    c.metric_train.iterations = 30;
    c.metric_train.log_every = 10;
    c.evaluation.held_out_batches = 2;
    c.evaluation.verification_positive_pairs = 100;
    c.evaluation.verification_negative_pairs = 200;
    c.validate();
    return c;
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tripletrack_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace tripletrack::checks
