#pragma once

// Training objective: L_total = alpha * L_cls + beta * L_loc + gamma * L2, with
//
//   L_cls = N-/(N+ + N-) * L+  +  N+/(N+ + N-) * L-
//
// L+ and L- are summed softmax cross-entropies over the selected positive and
// hard-negative anchors. L_loc is the smooth-L1 sum over positive offsets
// divided by max(N+, 1). L2 is 0.5 * sum of squared weights (biases excluded).

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfd/box.hpp"
#include "gfd/detection.hpp"
#include "gfd/tensor.hpp"

namespace gfd {

struct LossWeights {
    double alpha = 5.0;
    double beta = 10.0;
    double gamma = 1.0;
};

struct LossBreakdown {
    double cls = 0.0;
    double loc = 0.0;
    double l2 = 0.0;
    double total = 0.0;
    int n_pos = 0;
    int n_neg = 0;
    double l_pos = 0.0;
    double l_neg = 0.0;
};

/// Raised for NaN or infinite loss components; names the offending term.
class NonFiniteLoss : public std::runtime_error {
public:
    NonFiniteLoss(const std::string& component, double value);
    const std::string& component() const { return component_; }

private:
    std::string component_;
};

/// ratio * max(N+, 1) negatives with the highest loss (ties to the lower
/// index), capped at the number of negatives. Returned in ascending index order.
std::vector<std::size_t> select_hard_negatives(std::span<const double> per_anchor_loss,
                                               const Assignment& assignment, int ratio = 3);

/// Inverse class weighting of summed positive / negative losses. Throws
/// std::invalid_argument when N+ + N- = 0.
double classification_loss(double l_pos, double l_neg, int n_pos, int n_neg);
Tensor classification_loss(const Tensor& l_pos, const Tensor& l_neg, int n_pos, int n_neg);

/// Smooth-L1 sum over the given offsets divided by max(n_pos, 1).
Tensor localization_loss(const Tensor& pred, std::span<const double> target, int n_pos);

/// 0.5 * sum of squares over weight parameters; biases are skipped.
double l2_regularization(std::span<Parameter* const> params);
Tensor l2_regularization_tensor(std::span<Parameter* const> params);

/// Combines components; throws NonFiniteLoss for a non-finite input.
LossBreakdown total_loss(double cls, double loc, double l2, const LossWeights& w);
Tensor total_loss(const Tensor& cls, const Tensor& loc, const Tensor& l2, const LossWeights& w);

/// One positive training anchor.
struct PositiveAnchor {
    std::size_t anchor = 0;
    BoxOffsets target{};
};

/// Anchors chosen for one image in one step. Held fixed through backward.
struct ImageSelection {
    std::vector<PositiveAnchor> positives;
    std::vector<std::size_t> negatives;
};

/// Matches anchors to ground truths (normalized boxes) and picks OHEM
/// negatives from the current head outputs, per image.
std::vector<ImageSelection> select_training_anchors(std::span<const Tensor> head_outputs,
                                                    const AnchorLayout& layout,
                                                    std::span<const Box> anchors,
                                                    std::span<const std::vector<Box>> gts,
                                                    double match_iou, int ohem_ratio);

struct LossTerms {
    Tensor cls;
    Tensor loc;
    Tensor l2;
    Tensor total;
    LossBreakdown breakdown;
};

/// Full objective over a batch for a fixed selection. When the batch holds
/// no positive anchor, L_cls falls back to L- with coefficient 1 so that
/// background-only batches still produce a classification gradient.
LossTerms detection_loss(std::span<const Tensor> head_outputs, const AnchorLayout& layout,
                         std::span<const ImageSelection> selection,
                         std::span<Parameter* const> params, const LossWeights& weights);

}  // namespace gfd
