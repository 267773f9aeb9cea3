#pragma once

// Differentiable operations over gfd::Tensor. No broadcasting: every
// elementwise op requires identical shapes and throws ShapeError otherwise.

#include <cstddef>
#include <span>
#include <vector>

#include "gfd/tensor.hpp"

namespace gfd {

/// kernel (out_ch, in_ch, k, k), bias (1, out_ch, 1, 1) or any shape with out_ch values.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride,
              int padding);
inline Tensor conv2d(const Tensor& input, const Parameter& kernel, const Parameter& bias,
                     int stride, int padding) {
    return conv2d(input, kernel.tensor, bias.tensor, stride, padding);
}

/// max(0, x); the subgradient at exactly 0 is 0.
Tensor relu(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);

/// Channel concatenation, a's channels first.
Tensor concat_channels(const Tensor& a, const Tensor& b);

/// Channels [begin, begin + count).
Tensor slice_channels(const Tensor& x, int begin, int count);

/// Sum of all elements as a (1,1,1,1) tensor.
Tensor sum(const Tensor& x);

Tensor scale(const Tensor& x, double factor);

/// Location of one element inside one of several source tensors.
struct GatherIndex {
    std::size_t source = 0;
    std::size_t offset = 0;
};

/// Picks scattered elements from several tensors into a (1, k, 1, 1) vector.
Tensor gather(std::span<const Tensor> sources, std::span<const GatherIndex> indices);

/// Two-class softmax cross-entropy. `logits` holds k (background, foreground)
/// pairs interleaved; labels are 0 (background) or 1 (foreground). Returns the
/// per-pair losses as (1, k, 1, 1).
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

/// Plain-value form of the same loss, for ranking anchors without a graph.
double softmax_cross_entropy_value(double background_logit, double foreground_logit, int label);

/// Foreground probability of a (background, foreground) logit pair.
double foreground_probability(double background_logit, double foreground_logit);

/// Sum over elements of 0.5 r^2 if |r| < 1 else |r| - 0.5, r = pred - target.
Tensor smooth_l1(const Tensor& pred, std::span<const double> target);

/// 0.5 * sum(x^2).
Tensor half_sum_squares(const Tensor& x);

}  // namespace gfd
