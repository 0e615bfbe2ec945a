#pragma once

#include <span>
#include <vector>

#include "tripletrack/nn/tensor.hpp"

namespace tripletrack::nn {

/// Row-wise softmax with max subtraction.
Tensor softmax(const Tensor& logits);

struct LossAndGrad {
    double loss = 0.0;
    Tensor grad;
};

/// Mean over the batch of -log softmax(logits)[label]; grad = (softmax - onehot) / B.
LossAndGrad softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

/// Which pair the second distance of the margin constraint is measured on.
enum class TripletForm {
    positive_negative,  // d(a,p) - d(p,n): literal constraint form (default)
    anchor_negative,    // d(a,p) - d(a,n): conventional triplet form
};

enum class DistanceKind { euclidean, squared };

struct TripletConfig {
    double tau = -2.0;
    TripletForm form = TripletForm::positive_negative;
    DistanceKind distance = DistanceKind::euclidean;
};

/// Added under the square root so the Euclidean gradient stays finite at zero distance.
inline constexpr double kDistanceEpsilon = 1e-12;

double embedding_distance(std::span<const double> a, std::span<const double> b,
                          DistanceKind kind = DistanceKind::euclidean);

/// Signed constraint value d(a,p) - d(second) for one triple; the hinge is max(0, value - tau).
double triplet_margin_value(std::span<const double> anchor, std::span<const double> positive,
                            std::span<const double> negative, const TripletConfig& config);

struct TripletLoss {
    double loss = 0.0;
    Tensor grad_anchor;
    Tensor grad_positive;
    Tensor grad_negative;
    std::size_t active = 0;  // number of rows with a non-zero hinge
};

/// Mean hinge max(0, d(a,p) - d(second) - tau) over the rows of [B x K] embeddings.
/// Inactive rows, and rows exactly at the kink, contribute zero gradient.
TripletLoss triplet_hinge_loss(const Tensor& anchor, const Tensor& positive, const Tensor& negative,
                               const TripletConfig& config);

}  // namespace tripletrack::nn
