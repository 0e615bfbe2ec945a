#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "support/fixtures.hpp"
#include "tripletrack/assoc/hungarian.hpp"

using namespace tripletrack;
using namespace tripletrack::assoc;

namespace {

void expect_one_to_one(const Assignment& a, const CostMatrix& c) {
    std::set<std::size_t> rows, cols;
    for (const auto& [r, k] : a.matches) {
        EXPECT_LT(r, c.rows());
        EXPECT_LT(k, c.cols());
        EXPECT_TRUE(c.allowed(r, k));
        EXPECT_TRUE(rows.insert(r).second);
        EXPECT_TRUE(cols.insert(k).second);
    }
    for (auto r : a.unmatched_rows) EXPECT_TRUE(rows.insert(r).second);
    for (auto k : a.unmatched_cols) EXPECT_TRUE(cols.insert(k).second);
    EXPECT_EQ(rows.size(), c.rows());
    EXPECT_EQ(cols.size(), c.cols());
}

}  // namespace

TEST(Hungarian, TwoByTwoPicksTheAntiDiagonal) {
    const auto c = CostMatrix::from_rows({{1, 2}, {2, 1}});
    const auto a = hungarian(c);
    ASSERT_EQ(a.matches.size(), 2u);
    EXPECT_EQ(a.total_cost(c), 2.0);
    EXPECT_EQ(a.matches[0], std::make_pair(std::size_t{0}, std::size_t{0}));
    EXPECT_EQ(a.matches[1], std::make_pair(std::size_t{1}, std::size_t{1}));
}

TEST(Hungarian, CrossedOptimum) {
    const auto c = CostMatrix::from_rows({{4, 1, 3}, {2, 0, 5}, {3, 2, 2}});
    const auto a = hungarian(c);
    EXPECT_EQ(a.total_cost(c), 5.0);
    expect_one_to_one(a, c);
}

TEST(Hungarian, SingleEntry) {
    const auto c = CostMatrix::from_rows({{5}});
    const auto a = hungarian(c);
    ASSERT_EQ(a.matches.size(), 1u);
    EXPECT_EQ(a.total_cost(c), 5.0);
}

TEST(Hungarian, EmptyMatrices) {
    EXPECT_TRUE(hungarian(CostMatrix(0, 0)).matches.empty());
    const auto rows_only = hungarian(CostMatrix(3, 0));
    EXPECT_EQ(rows_only.unmatched_rows.size(), 3u);
    const auto cols_only = hungarian(CostMatrix(0, 2));
    EXPECT_EQ(cols_only.unmatched_cols.size(), 2u);
}

TEST(Hungarian, MatchesBruteForceUpToSeven) {
    for (std::size_t n = 1; n <= 7; ++n) {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto c = checks::random_costs(n, seed * 31 + n);
            const auto a = hungarian(c);
            ASSERT_EQ(a.matches.size(), n);
            EXPECT_NEAR(a.total_cost(c), checks::brute_force_minimum(c), 1e-9) << "n=" << n << " seed=" << seed;
        }
    }
}

TEST(Hungarian, NoRandomMatchingIsCheaper) {
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto c = checks::random_costs(12, 1000 + seed);
        const double best = hungarian(c).total_cost(c);
        std::vector<std::size_t> perm(12);
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        for (int trial = 0; trial < 200; ++trial) {
            std::shuffle(perm.begin(), perm.end(), rng);
            double total = 0.0;
            for (std::size_t r = 0; r < perm.size(); ++r) total += c(r, perm[r]);
            EXPECT_LE(best, total + 1e-9);
        }
    }
}

TEST(Hungarian, RectangularWide) {
    const auto c = CostMatrix::from_rows({{9, 1, 7, 3}, {2, 8, 6, 4}});
    const auto a = hungarian(c);
    ASSERT_EQ(a.matches.size(), 2u);
    EXPECT_EQ(a.total_cost(c), 3.0);
    EXPECT_EQ(a.unmatched_cols.size(), 2u);
    expect_one_to_one(a, c);
}

TEST(Hungarian, RectangularTallMatchesBruteForceOfTranspose) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto square = checks::random_costs(5, 500 + seed);
        CostMatrix tall(5, 3);
        for (std::size_t r = 0; r < 5; ++r)
            for (std::size_t k = 0; k < 3; ++k) tall.set(r, k, square(r, k));
        const auto a = hungarian(tall);
        ASSERT_EQ(a.matches.size(), 3u);
        expect_one_to_one(a, tall);
        double best = 1e300;
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j)
                for (std::size_t k = 0; k < 5; ++k)
                    if (i != j && j != k && i != k) best = std::min(best, tall(i, 0) + tall(j, 1) + tall(k, 2));
        EXPECT_NEAR(a.total_cost(tall), best, 1e-9);
    }
}

TEST(Hungarian, ForbiddenEntriesAreNeverMatched) {
    auto c = CostMatrix::from_rows({{1, 100}, {100, 1}});
    c.forbid(0, 0);
    const auto a = hungarian(c);
    expect_one_to_one(a, c);
    ASSERT_EQ(a.matches.size(), 2u);
    EXPECT_EQ(a.total_cost(c), 200.0);
}

TEST(Hungarian, PrefersMoreMatchesOverLowerCost) {
    auto c = CostMatrix::from_rows({{0, 5}, {1, 0}});
    c.forbid(1, 1);
    const auto a = hungarian(c);
    ASSERT_EQ(a.matches.size(), 2u);
    EXPECT_EQ(a.total_cost(c), 6.0);
}

TEST(Hungarian, AllForbiddenLeavesEverythingUnmatched) {
    auto c = CostMatrix::from_rows({{1, 2}, {3, 4}});
    c.apply_gate(0.5);
    const auto a = hungarian(c);
    EXPECT_TRUE(a.matches.empty());
    EXPECT_EQ(a.unmatched_rows.size(), 2u);
    EXPECT_EQ(a.unmatched_cols.size(), 2u);
}

TEST(Hungarian, GateForbidsOnlyEntriesAbove) {
    auto c = CostMatrix::from_rows({{1, 2}, {3, 4}});
    c.apply_gate(3.0);
    EXPECT_TRUE(c.allowed(0, 0));
    EXPECT_TRUE(c.allowed(1, 0));
    EXPECT_FALSE(c.allowed(1, 1));
}

TEST(Hungarian, ForbiddenRandomMatchesBruteForce) {
    std::mt19937_64 rng(77);
    std::bernoulli_distribution forbid(0.3);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto c = checks::random_costs(5, 2000 + seed);
        for (std::size_t r = 0; r < 5; ++r)
            for (std::size_t k = 0; k < 5; ++k)
                if (forbid(rng)) c.forbid(r, k);
        // Brute force over permutations with partial matchings: maximize count, then minimize cost.
        std::vector<std::size_t> perm{0, 1, 2, 3, 4};
        std::size_t best_count = 0;
        double best_cost = 0.0;
        do {
            std::size_t count = 0;
            double cost = 0.0;
            for (std::size_t r = 0; r < 5; ++r) {
                if (c.allowed(r, perm[r])) {
                    ++count;
                    cost += c(r, perm[r]);
                }
            }
            if (count > best_count || (count == best_count && cost < best_cost)) {
                best_count = count;
                best_cost = cost;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        const auto a = hungarian(c);
        expect_one_to_one(a, c);
        ASSERT_EQ(a.matches.size(), best_count) << "seed=" << seed;
        EXPECT_NEAR(a.total_cost(c), best_cost, 1e-9) << "seed=" << seed;
    }
}

TEST(CostMatrix, RejectsNegativeAndNan) {
    CostMatrix c(2, 2);
    EXPECT_THROW(c.set(0, 0, -1.0), std::invalid_argument);
    EXPECT_THROW(c.set(0, 0, std::nan("")), std::invalid_argument);
    EXPECT_THROW(CostMatrix::from_rows({{1, 2}, {3}}), std::invalid_argument);
}
