#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "playtrack/assignment.hpp"

using namespace playtrack;

namespace {

CostMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::uniform_int_distribution<int> value(0, 20);
    CostMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = value(rng) / 4.0;
    }
    return m;
}

void expect_one_to_one(const AssignmentResult& res, const CostMatrix& m) {
    std::set<std::size_t> rows, cols;
    for (const auto& [r, c] : res.matches) {
        EXPECT_TRUE(rows.insert(r).second);
        EXPECT_TRUE(cols.insert(c).second);
        EXPECT_FALSE(m.gated(r, c));
    }
    EXPECT_EQ(rows.size() + res.unmatched_rows.size(), m.rows());
    EXPECT_EQ(cols.size() + res.unmatched_cols.size(), m.cols());
}

}  // namespace

TEST(SolveAssignment, TwoByTwoExample) {
    CostMatrix m(2, 2);
    m.at(0, 0) = 1;
    m.at(0, 1) = 2;
    m.at(1, 0) = 2;
    m.at(1, 1) = 4;
    const auto res = solve_assignment(m);
    ASSERT_EQ(res.matches.size(), 2u);
    EXPECT_EQ(res.matches[0], (std::pair<std::size_t, std::size_t>{0, 1}));
    EXPECT_EQ(res.matches[1], (std::pair<std::size_t, std::size_t>{1, 0}));
    EXPECT_DOUBLE_EQ(res.total_cost, 4.0);
}

TEST(SolveAssignment, SingleAndFullyGated) {
    CostMatrix one(1, 1, 0.7);
    EXPECT_EQ(solve_assignment(one).matches.size(), 1u);

    CostMatrix gated(2, 3, 0.1);
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 3; ++c) gated.gate(r, c);
    }
    const auto res = solve_assignment(gated);
    EXPECT_TRUE(res.matches.empty());
    EXPECT_EQ(res.unmatched_rows.size(), 2u);
    EXPECT_EQ(res.unmatched_cols.size(), 3u);
}

TEST(SolveAssignment, EmptyMatrix) {
    const auto res = solve_assignment(CostMatrix(0, 4));
    EXPECT_TRUE(res.matches.empty());
    EXPECT_EQ(res.unmatched_cols.size(), 4u);
}

TEST(SolveAssignment, RejectsNonFiniteUngatedCost) {
    CostMatrix m(2, 2, 1.0);
    m.at(1, 1) = std::nan("");
    EXPECT_THROW(solve_assignment(m), std::invalid_argument);
    m.gate(1, 1);
    EXPECT_NO_THROW(solve_assignment(m));
}

TEST(SolveAssignment, MatchesExhaustiveSearch) {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = random_matrix(rng, dim(rng), dim(rng));
        const auto res = solve_assignment(m);
        EXPECT_EQ(res.total_cost, oracle::brute_force_assignment(m));
        EXPECT_EQ(res.matches.size(), std::min(m.rows(), m.cols()));
        expect_one_to_one(res, m);
    }
}

TEST(SolveAssignment, GatedMatchesExhaustiveSearch) {
    std::mt19937_64 rng(22);
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    std::bernoulli_distribution gate(0.4);
    for (int trial = 0; trial < 100; ++trial) {
        auto m = random_matrix(rng, dim(rng), dim(rng));
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) {
                if (gate(rng)) m.gate(r, c);
            }
        }
        const auto res = solve_assignment(m);
        const auto best = oracle::brute_force_gated_assignment(m);
        EXPECT_EQ(res.matches.size(), best.pairs);
        EXPECT_NEAR(res.total_cost, best.cost, 1e-12);
        expect_one_to_one(res, m);
    }
}

TEST(SolveAssignment, ScaleInvariant) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        CostMatrix m(5, 4), scaled(5, 4);
        for (std::size_t r = 0; r < 5; ++r) {
            for (std::size_t c = 0; c < 4; ++c) {
                m.at(r, c) = value(rng);
                scaled.at(r, c) = 8.0 * m.at(r, c);
            }
        }
        EXPECT_EQ(solve_assignment(m).matches, solve_assignment(scaled).matches);
    }
}

TEST(SolveAssignment, TiesResolveDeterministically) {
    CostMatrix m(3, 3, 1.0);
    const auto a = solve_assignment(m), b = solve_assignment(m);
    EXPECT_EQ(a.matches, b.matches);
    EXPECT_DOUBLE_EQ(a.total_cost, 3.0);
}
