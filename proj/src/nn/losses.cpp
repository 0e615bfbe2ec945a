#include "tripletrack/nn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tripletrack::nn {

Tensor softmax(const Tensor& logits) {
    Tensor out = logits;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        const double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (auto& v : row) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (auto& v : row) v /= sum;
    }
    return out;
}

LossAndGrad softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
    if (logits.rank() != 2 || logits.rows() != labels.size()) {
        throw DimensionError("softmax_cross_entropy: logits " + shape_string(logits.shape()) + " vs " +
                             std::to_string(labels.size()) + " labels");
    }
    const std::size_t batch = logits.rows(), classes = logits.cols();
    LossAndGrad out{0.0, Tensor::matrix(batch, classes)};
    for (std::size_t r = 0; r < batch; ++r) {
        const int label = labels[r];
        if (label < 0 || static_cast<std::size_t>(label) >= classes) {
            throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) + " outside [0, " +
                                    std::to_string(classes) + ")");
        }
        auto row = logits.row(r);
        const double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double v : row) sum += std::exp(v - mx);
        const double log_z = mx + std::log(sum);
        out.loss += log_z - row[static_cast<std::size_t>(label)];
        for (std::size_t c = 0; c < classes; ++c) {
            const double p = std::exp(row[c] - log_z);
            out.grad(r, c) = (p - (static_cast<std::size_t>(label) == c ? 1.0 : 0.0)) / static_cast<double>(batch);
        }
    }
    out.loss /= static_cast<double>(batch);
    return out;
}

double embedding_distance(std::span<const double> a, std::span<const double> b, DistanceKind kind) {
    if (a.size() != b.size()) throw DimensionError("embedding_distance: dimension mismatch");
    double sq = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        sq += d * d;
    }
    return kind == DistanceKind::squared ? sq : std::sqrt(sq + kDistanceEpsilon);
}

double triplet_margin_value(std::span<const double> anchor, std::span<const double> positive,
                            std::span<const double> negative, const TripletConfig& config) {
    const double d_ap = embedding_distance(anchor, positive, config.distance);
    const double d_second = config.form == TripletForm::positive_negative
                                ? embedding_distance(positive, negative, config.distance)
                                : embedding_distance(anchor, negative, config.distance);
    return d_ap - d_second;
}

namespace {

// Adds scale * d(distance(x, y))/dx to gx and the opposite to gy.
void accumulate_distance_grad(std::span<const double> x, std::span<const double> y, double scale,
                              DistanceKind kind, std::span<double> gx, std::span<double> gy) {
    const double d = embedding_distance(x, y, kind);
    const double factor = kind == DistanceKind::squared ? 2.0 * scale : scale / d;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double g = factor * (x[k] - y[k]);
        gx[k] += g;
        gy[k] -= g;
    }
}

}  // namespace

TripletLoss triplet_hinge_loss(const Tensor& anchor, const Tensor& positive, const Tensor& negative,
                               const TripletConfig& config) {
    require_same_shape(anchor, positive, "triplet_hinge_loss");
    require_same_shape(anchor, negative, "triplet_hinge_loss");
    if (anchor.rank() != 2) throw DimensionError("triplet_hinge_loss expects [B x K] embeddings");

    const std::size_t batch = anchor.rows();
    TripletLoss out{0.0, Tensor(anchor.shape()), Tensor(anchor.shape()), Tensor(anchor.shape()), 0};
    const double scale = 1.0 / static_cast<double>(batch);
    for (std::size_t r = 0; r < batch; ++r) {
        const double slack = triplet_margin_value(anchor.row(r), positive.row(r), negative.row(r), config) - config.tau;
        if (!(slack > 0.0)) continue;
        out.loss += slack;
        ++out.active;
        accumulate_distance_grad(anchor.row(r), positive.row(r), scale, config.distance, out.grad_anchor.row(r),
                                 out.grad_positive.row(r));
        if (config.form == TripletForm::positive_negative) {
            accumulate_distance_grad(positive.row(r), negative.row(r), -scale, config.distance,
                                     out.grad_positive.row(r), out.grad_negative.row(r));
        } else {
            accumulate_distance_grad(anchor.row(r), negative.row(r), -scale, config.distance, out.grad_anchor.row(r),
                                     out.grad_negative.row(r));
        }
    }
    out.loss *= scale;
    return out;
}

}  // namespace tripletrack::nn
