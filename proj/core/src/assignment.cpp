#include "playtrack/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace playtrack {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill), gated_(rows * cols, 0) {}

namespace {

// Square-or-wide (n <= m) minimization; returns row -> col.
std::vector<std::size_t> hungarian(const std::vector<double>& a, std::size_t n, std::size_t m) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // 1-based potentials formulation; column 0 is a virtual start.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n, m);
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

}  // namespace

AssignmentResult solve_assignment(const CostMatrix& costs) {
    AssignmentResult result;
    const std::size_t rows = costs.rows();
    const std::size_t cols = costs.cols();
    if (costs.empty()) {
        for (std::size_t r = 0; r < rows; ++r) result.unmatched_rows.push_back(r);
        for (std::size_t c = 0; c < cols; ++c) result.unmatched_cols.push_back(c);
        return result;
    }

    double max_abs = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (costs.gated(r, c)) continue;
            const double v = costs.at(r, c);
            if (!std::isfinite(v)) throw std::invalid_argument("assignment cost is not finite");
            max_abs = std::max(max_abs, std::abs(v));
        }
    }
    // Any matching with one more ungated pair beats every matching with fewer.
    const double forbidden = (2.0 * max_abs + 1.0) * static_cast<double>(std::min(rows, cols) + 1);

    const bool transpose = rows > cols;
    const std::size_t n = transpose ? cols : rows;
    const std::size_t m = transpose ? rows : cols;
    std::vector<double> a(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t r = transpose ? j : i;
            const std::size_t c = transpose ? i : j;
            a[i * m + j] = costs.gated(r, c) ? forbidden : costs.at(r, c);
        }
    }
    const auto assign = hungarian(a, n, m);

    std::vector<std::size_t> row_match(rows, cols);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = transpose ? assign[i] : i;
        const std::size_t c = transpose ? i : assign[i];
        if (r < rows && c < cols && !costs.gated(r, c)) row_match[r] = c;
    }
    std::vector<char> col_used(cols, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        if (row_match[r] < cols) {
            result.matches.emplace_back(r, row_match[r]);
            result.total_cost += costs.at(r, row_match[r]);
            col_used[row_match[r]] = 1;
        } else {
            result.unmatched_rows.push_back(r);
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        if (!col_used[c]) result.unmatched_cols.push_back(c);
    }
    return result;
}

}  // namespace playtrack
