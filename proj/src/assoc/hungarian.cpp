#include "tripletrack/assoc/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tripletrack::assoc {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (std::isnan(fill) || fill < 0.0) throw std::invalid_argument("CostMatrix: fill must be a non-negative cost");
}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    CostMatrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw std::invalid_argument("CostMatrix: ragged rows");
        for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rows[r][c]);
    }
    return m;
}

void CostMatrix::set(std::size_t r, std::size_t c, double cost) {
    if (std::isnan(cost) || cost < 0.0) {
        throw std::invalid_argument("CostMatrix: entry (" + std::to_string(r) + "," + std::to_string(c) +
                                    ") must be non-negative");
    }
    data_[r * cols_ + c] = cost;
}

void CostMatrix::apply_gate(double gate) {
    for (auto& v : data_) {
        if (v > gate) v = kForbidden;
    }
}

double Assignment::total_cost(const CostMatrix& costs) const {
    double total = 0.0;
    for (auto [r, c] : matches) total += costs(r, c);
    return total;
}

Assignment hungarian(const CostMatrix& costs) {
    Assignment out;
    const std::size_t rows = costs.rows(), cols = costs.cols();
    const std::size_t n = std::max(rows, cols);
    if (n == 0) return out;

    double max_allowed = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (costs.allowed(r, c)) max_allowed = std::max(max_allowed, costs(r, c));
        }
    }
    // Any matching with one more allowed pair is strictly cheaper than one without it.
    const double pad = (max_allowed + 1.0) * static_cast<double>(n + 1);

    auto cost = [&](std::size_t r, std::size_t c) {
        return (r < rows && c < cols && costs.allowed(r, c)) ? costs(r, c) : pad;
    };

    // 1-based potentials formulation; p[j] is the row matched to column j.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<double> minv(n + 1);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
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

    std::vector<std::size_t> row_to_col(n, n);
    for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
    std::vector<char> col_used(cols, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t c = row_to_col[r];
        if (c < cols && costs.allowed(r, c)) {
            out.matches.emplace_back(r, c);
            col_used[c] = 1;
        } else {
            out.unmatched_rows.push_back(r);
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        if (!col_used[c]) out.unmatched_cols.push_back(c);
    }
    return out;
}

}  // namespace tripletrack::assoc
