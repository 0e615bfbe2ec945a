#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace tripletrack::assoc {

/// Rows are tracks, columns detections. Entries are finite non-negative costs or forbidden.
class CostMatrix {
public:
    static constexpr double kForbidden = std::numeric_limits<double>::infinity();

    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    /// Throws std::invalid_argument for negative or NaN costs.
    void set(std::size_t r, std::size_t c, double cost);
    void forbid(std::size_t r, std::size_t c) { data_[r * cols_ + c] = kForbidden; }
    bool allowed(std::size_t r, std::size_t c) const { return data_[r * cols_ + c] != kForbidden; }

    /// Forbids every entry strictly above `gate`.
    void apply_gate(double gate);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct Assignment {
    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (row, col), ascending by row
    std::vector<std::size_t> unmatched_rows;
    std::vector<std::size_t> unmatched_cols;

    double total_cost(const CostMatrix& costs) const;
};

/// Kuhn-Munkres with potentials, O(n^3). Returns the maximum-cardinality matching over allowed
/// entries with minimum total cost among those. Rectangular and forbidden entries are handled by
/// padding with a cost larger than any allowed matching; pad matches are discarded.
Assignment hungarian(const CostMatrix& costs);

}  // namespace tripletrack::assoc
