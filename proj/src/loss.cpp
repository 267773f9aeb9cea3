#include "gfd/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gfd/ops.hpp"

namespace gfd {

NonFiniteLoss::NonFiniteLoss(const std::string& component, double value)
    : std::runtime_error("non-finite loss component " + component + " = " + std::to_string(value)),
      component_(component) {}

std::vector<std::size_t> select_hard_negatives(std::span<const double> per_anchor_loss,
                                               const Assignment& assignment, int ratio) {
    if (ratio < 1) throw std::invalid_argument("OHEM ratio must be at least 1");
    if (per_anchor_loss.size() != assignment.labels.size())
        throw std::invalid_argument("per-anchor loss and assignment differ in length");
    std::vector<std::size_t> negatives;
    for (std::size_t a = 0; a < assignment.labels.size(); ++a)
        if (assignment.is_negative(a)) negatives.push_back(a);
    const std::size_t k = std::min<std::size_t>(
        negatives.size(), static_cast<std::size_t>(ratio) * std::max(assignment.num_positive(), 1));
    std::partial_sort(negatives.begin(), negatives.begin() + k, negatives.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (per_anchor_loss[a] != per_anchor_loss[b])
                              return per_anchor_loss[a] > per_anchor_loss[b];
                          return a < b;
                      });
    negatives.resize(k);
    std::sort(negatives.begin(), negatives.end());
    return negatives;
}

double classification_loss(double l_pos, double l_neg, int n_pos, int n_neg) {
    if (n_pos + n_neg <= 0)
        throw std::invalid_argument("classification loss over an empty selection");
    const double n = static_cast<double>(n_pos) + n_neg;
    return (n_neg / n) * l_pos + (n_pos / n) * l_neg;
}

Tensor classification_loss(const Tensor& l_pos, const Tensor& l_neg, int n_pos, int n_neg) {
    if (n_pos + n_neg <= 0)
        throw std::invalid_argument("classification loss over an empty selection");
    const double n = static_cast<double>(n_pos) + n_neg;
    return add(scale(l_pos, n_neg / n), scale(l_neg, n_pos / n));
}

Tensor localization_loss(const Tensor& pred, std::span<const double> target, int n_pos) {
    return scale(smooth_l1(pred, target), 1.0 / std::max(n_pos, 1));
}

double l2_regularization(std::span<Parameter* const> params) {
    double acc = 0.0;
    for (const Parameter* p : params) {
        if (p->kind != ParamKind::Weight) continue;
        for (double v : p->tensor.values()) acc += v * v;
    }
    return 0.5 * acc;
}

Tensor l2_regularization_tensor(std::span<Parameter* const> params) {
    Tensor acc = Tensor::scalar(0.0);
    for (const Parameter* p : params)
        if (p->kind == ParamKind::Weight) acc = add(acc, half_sum_squares(p->tensor));
    return acc;
}

namespace {

void require_finite(const char* name, double v) {
    if (!std::isfinite(v)) throw NonFiniteLoss(name, v);
}

}  // namespace

LossBreakdown total_loss(double cls, double loc, double l2, const LossWeights& w) {
    require_finite("L_cls", cls);
    require_finite("L_loc", loc);
    require_finite("L2", l2);
    LossBreakdown b;
    b.cls = cls;
    b.loc = loc;
    b.l2 = l2;
    b.total = w.alpha * cls + w.beta * loc + w.gamma * l2;
    require_finite("L_total", b.total);
    return b;
}

Tensor total_loss(const Tensor& cls, const Tensor& loc, const Tensor& l2, const LossWeights& w) {
    require_finite("L_cls", cls.item());
    require_finite("L_loc", loc.item());
    require_finite("L2", l2.item());
    return add(add(scale(cls, w.alpha), scale(loc, w.beta)), scale(l2, w.gamma));
}

std::vector<ImageSelection> select_training_anchors(std::span<const Tensor> head_outputs,
                                                    const AnchorLayout& layout,
                                                    std::span<const Box> anchors,
                                                    std::span<const std::vector<Box>> gts,
                                                    double match_iou, int ohem_ratio) {
    if (anchors.size() != layout.anchor_count())
        throw std::invalid_argument("anchor list does not match the head layout");
    std::vector<ImageSelection> out;
    out.reserve(gts.size());
    for (std::size_t img = 0; img < gts.size(); ++img) {
        const Assignment assign = match_anchors(anchors, gts[img], match_iou);
        std::vector<double> ce(anchors.size(), 0.0);
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            if (!assign.is_negative(a)) continue;
            const auto bg = layout.index(static_cast<int>(img), a, kBackgroundField);
            const auto fg = layout.index(static_cast<int>(img), a, kForegroundField);
            ce[a] = softmax_cross_entropy_value(head_outputs[bg.source].values()[bg.offset],
                                                head_outputs[fg.source].values()[fg.offset], 0);
        }
        ImageSelection sel;
        for (std::size_t a = 0; a < anchors.size(); ++a)
            if (assign.is_positive(a))
                sel.positives.push_back({a, encode_box(anchors[a], gts[img][assign.labels[a]])});
        sel.negatives = select_hard_negatives(ce, assign, ohem_ratio);
        out.push_back(std::move(sel));
    }
    return out;
}

LossTerms detection_loss(std::span<const Tensor> head_outputs, const AnchorLayout& layout,
                         std::span<const ImageSelection> selection,
                         std::span<Parameter* const> params, const LossWeights& weights) {
    std::vector<GatherIndex> pos_logits, neg_logits, pos_offsets;
    std::vector<double> offset_targets;
    for (std::size_t img = 0; img < selection.size(); ++img) {
        const int n = static_cast<int>(img);
        for (const auto& p : selection[img].positives) {
            pos_logits.push_back(layout.index(n, p.anchor, kBackgroundField));
            pos_logits.push_back(layout.index(n, p.anchor, kForegroundField));
            for (int k = 0; k < 4; ++k) {
                pos_offsets.push_back(layout.index(n, p.anchor, kOffsetField + k));
                offset_targets.push_back(p.target[k]);
            }
        }
        for (std::size_t a : selection[img].negatives) {
            neg_logits.push_back(layout.index(n, a, kBackgroundField));
            neg_logits.push_back(layout.index(n, a, kForegroundField));
        }
    }
    const int n_pos = static_cast<int>(pos_logits.size() / 2);
    const int n_neg = static_cast<int>(neg_logits.size() / 2);

    const std::vector<int> pos_labels(n_pos, 1), neg_labels(n_neg, 0);
    const Tensor l_pos = sum(softmax_cross_entropy(gather(head_outputs, pos_logits), pos_labels));
    const Tensor l_neg = sum(softmax_cross_entropy(gather(head_outputs, neg_logits), neg_labels));

    LossTerms t;
    if (n_pos == 0)
        t.cls = l_neg;
    else
        t.cls = classification_loss(l_pos, l_neg, n_pos, n_neg);
    t.loc = localization_loss(gather(head_outputs, pos_offsets), offset_targets, n_pos);
    t.l2 = l2_regularization_tensor(params);
    t.total = total_loss(t.cls, t.loc, t.l2, weights);

    t.breakdown.cls = t.cls.item();
    t.breakdown.loc = t.loc.item();
    t.breakdown.l2 = t.l2.item();
    t.breakdown.total = t.total.item();
    t.breakdown.n_pos = n_pos;
    t.breakdown.n_neg = n_neg;
    t.breakdown.l_pos = l_pos.item();
    t.breakdown.l_neg = l_neg.item();
    return t;
}

}  // namespace gfd
