#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace playtrack {

/// Dense rows x cols cost table with a parallel mask of forbidden (gated) pairs.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    void gate(std::size_t r, std::size_t c) { gated_[r * cols_ + c] = 1; }
    [[nodiscard]] bool gated(std::size_t r, std::size_t c) const { return gated_[r * cols_ + c] != 0; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
    std::vector<std::uint8_t> gated_;
};

struct AssignmentResult {
    std::vector<std::pair<std::size_t, std::size_t>> matches;  ///< (row, col), sorted by row
    std::vector<std::size_t> unmatched_rows;
    std::vector<std::size_t> unmatched_cols;
    double total_cost = 0.0;  ///< summed over matches in row order
};

/// Kuhn-Munkres with potentials on rectangular matrices. Among all one-to-one matchings that
/// use only ungated pairs, returns one with the most pairs and, among those, the least total
/// cost. Deterministic: ties resolve toward the lowest row index.
/// Throws std::invalid_argument on non-finite ungated costs.
AssignmentResult solve_assignment(const CostMatrix& costs);

}  // namespace playtrack
