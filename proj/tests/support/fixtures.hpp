#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tripletrack/app/config.hpp"
#include "tripletrack/assoc/hungarian.hpp"
#include "tripletrack/eval/clear_mot.hpp"

namespace tripletrack::checks {

/// Ground truth and hypotheses of a hand-traced CLEAR-MOT case.
struct MotFixture {
    std::string name;
    std::vector<eval::BoxRow> ground_truth;
    std::vector<eval::BoxRow> hypotheses;
};

/// Two targets over 10 frames, reported exactly.
MotFixture perfect_fixture();
/// One target over 10 frames, nothing reported.
MotFixture empty_fixture();
/// One target over 10 frames reported exactly, with the hypothesis id changing at frame 6.
MotFixture switch_fixture();

/// Minimum total cost over all n! permutations of a square matrix without forbidden entries.
double brute_force_minimum(const assoc::CostMatrix& costs);

/// Random n x n matrix with entries uniform in [0, 10).
assoc::CostMatrix random_costs(std::size_t n, std::uint64_t seed);

/// Small scene and short training budgets for tests that run the whole pipeline.
app::RunConfig quick_config();

/// Directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace tripletrack::checks
