#include "gfd/detection.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "gfd/init.hpp"

namespace gfd {

int Assignment::num_positive() const {
    return static_cast<int>(std::count_if(labels.begin(), labels.end(), [](int l) { return l >= 0; }));
}

int Assignment::num_negative() const {
    return static_cast<int>(std::count(labels.begin(), labels.end(), kNegative));
}

Assignment match_anchors(std::span<const Box> anchors, std::span<const Box> gts,
                         double iou_threshold, std::span<const bool> gt_ignore) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0))
        throw std::invalid_argument("matching IoU threshold must lie in (0, 1)");
    if (!gt_ignore.empty() && gt_ignore.size() != gts.size())
        throw std::invalid_argument("gt_ignore must have one flag per ground truth");
    const std::size_t na = anchors.size(), ng = gts.size();
    Assignment out;
    out.labels.assign(na, Assignment::kNegative);
    if (ng == 0) return out;

    auto ignored = [&](std::size_t g) { return !gt_ignore.empty() && gt_ignore[g]; };

    std::vector<double> overlap(na * ng);
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t g = 0; g < ng; ++g) overlap[a * ng + g] = iou(anchors[a], gts[g]);

    // Each anchor's best ground truth, ties to the lower index.
    for (std::size_t a = 0; a < na; ++a) {
        std::size_t best = 0;
        for (std::size_t g = 1; g < ng; ++g)
            if (overlap[a * ng + g] > overlap[a * ng + best]) best = g;
        if (overlap[a * ng + best] >= iou_threshold)
            out.labels[a] = ignored(best) ? Assignment::kIgnore : static_cast<int>(best);
    }

    // Forced matches: repeatedly take the highest-IoU pair among unclaimed
    // anchors and ground truths that have not yet claimed one.
    std::vector<bool> anchor_claimed(na, false), gt_done(ng, false);
    for (std::size_t round = 0; round < ng; ++round) {
        double best_iou = 0.0;
        std::size_t best_a = na, best_g = ng;
        for (std::size_t g = 0; g < ng; ++g) {
            if (gt_done[g] || ignored(g)) continue;
            for (std::size_t a = 0; a < na; ++a) {
                if (anchor_claimed[a]) continue;
                const double v = overlap[a * ng + g];
                if (v > best_iou || (v == best_iou && v > 0.0 && a < best_a)) {
                    best_iou = v;
                    best_a = a;
                    best_g = g;
                }
            }
        }
        if (best_a == na) break;
        anchor_claimed[best_a] = true;
        gt_done[best_g] = true;
        out.labels[best_a] = static_cast<int>(best_g);
    }
    return out;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
    std::vector<Detection> kept;
    for (std::size_t i : order) {
        bool suppressed = false;
        for (const auto& k : kept)
            if (iou(k.box, dets[i].box) > iou_threshold) {
                suppressed = true;
                break;
            }
        if (!suppressed) kept.push_back(dets[i]);
    }
    return kept;
}

AnchorLayout::AnchorLayout(const FusionTopology& t) {
    for (const HeadMap& m : t.head_maps()) {
        const auto& l = t.geometry.levels[m.level];
        maps_.push_back({total_, l.anchors_per_loc, l.height, l.width});
        starts_.push_back(total_);
        total_ += static_cast<std::size_t>(l.anchors_per_loc) * l.height * l.width;
    }
}

GatherIndex AnchorLayout::index(int image, std::size_t anchor, int field) const {
    if (anchor >= total_) throw std::out_of_range("anchor index out of range");
    const std::size_t head =
        static_cast<std::size_t>(std::upper_bound(starts_.begin(), starts_.end(), anchor) -
                                 starts_.begin()) - 1;
    const Map& m = maps_[head];
    const std::size_t local = anchor - m.first;
    const std::size_t a = local % m.anchors;
    const std::size_t loc = local / m.anchors;
    const std::size_t channels = static_cast<std::size_t>(m.anchors) * kHeadFields;
    const std::size_t plane = static_cast<std::size_t>(m.height) * m.width;
    const std::size_t channel = a * kHeadFields + field;
    return {head, (static_cast<std::size_t>(image) * channels + channel) * plane + loc};
}

Shape AnchorLayout::head_shape(std::size_t head, int batch) const {
    const Map& m = maps_[head];
    return {batch, m.anchors * kHeadFields, m.height, m.width};
}

DetectionHeads::DetectionHeads(const FusionTopology& t, std::mt19937_64& rng,
                               const std::string& prefix) {
    for (const HeadMap& m : t.head_maps()) {
        const auto& l = t.geometry.levels[m.level];
        const std::string name = prefix + "." + l.name + stream_suffix(m.stream);
        heads_.push_back({make_conv_weight(name + ".weight", l.anchors_per_loc * kHeadFields,
                                           l.channels, 3, rng),
                          make_conv_bias(name + ".bias", l.anchors_per_loc * kHeadFields)});
    }
}

std::vector<Tensor> DetectionHeads::forward(std::span<const Tensor> head_maps) const {
    if (head_maps.size() != heads_.size())
        throw ShapeError("expected " + std::to_string(heads_.size()) + " head maps, got " +
                         std::to_string(head_maps.size()));
    std::vector<Tensor> out;
    out.reserve(heads_.size());
    for (std::size_t i = 0; i < heads_.size(); ++i)
        out.push_back(conv2d(head_maps[i], heads_[i].weight, heads_[i].bias, 1, 1));
    return out;
}

std::vector<Parameter*> DetectionHeads::parameters() {
    std::vector<Parameter*> out;
    for (auto& h : heads_) {
        out.push_back(&h.weight);
        out.push_back(&h.bias);
    }
    return out;
}

std::vector<Detection> predict(std::span<const Tensor> head_outputs, const AnchorLayout& layout,
                               std::span<const Box> anchors, int image,
                               const PredictOptions& options) {
    if (anchors.size() != layout.anchor_count())
        throw std::invalid_argument("predict: " + std::to_string(anchors.size()) +
                                    " anchors for a layout of " +
                                    std::to_string(layout.anchor_count()));
    if (head_outputs.size() != layout.head_count())
        throw std::invalid_argument("predict: " + std::to_string(head_outputs.size()) +
                                    " head outputs for " + std::to_string(layout.head_count()) +
                                    " heads");
    for (std::size_t h = 0; h < head_outputs.size(); ++h) {
        const Shape& s = head_outputs[h].shape();
        const Shape want = layout.head_shape(h, s.n);
        if (!(s == want) || image >= s.n)
            throw ShapeError("predict: head " + std::to_string(h) + " output " + s.str() +
                             " does not match the anchor layout " + want.str());
    }

    auto value = [&](std::size_t a, int field) {
        const GatherIndex ix = layout.index(image, a, field);
        return head_outputs[ix.source].values()[ix.offset];
    };

    std::vector<std::pair<double, std::size_t>> candidates;
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        const double score = foreground_probability(value(a, kBackgroundField), value(a, kForegroundField));
        if (score > options.score_threshold) candidates.emplace_back(score, a);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    if (candidates.size() > options.pre_nms_top_k) candidates.resize(options.pre_nms_top_k);

    std::vector<Detection> dets;
    dets.reserve(candidates.size());
    for (const auto& [score, a] : candidates) {
        const BoxOffsets t{value(a, kOffsetField), value(a, kOffsetField + 1),
                           value(a, kOffsetField + 2), value(a, kOffsetField + 3)};
        dets.push_back({decode_box(anchors[a], t), score});
    }
    auto kept = nms(dets, options.nms_threshold);
    if (kept.size() > options.max_detections) kept.resize(options.max_detections);
    return kept;
}

std::vector<std::vector<Detection>> predict(std::span<const Tensor> head_maps,
                                            const DetectionHeads& heads,
                                            const AnchorLayout& layout,
                                            std::span<const Box> anchors,
                                            const PredictOptions& options) {
    const auto outputs = heads.forward(head_maps);
    const int batch = outputs.empty() ? 0 : outputs.front().shape().n;
    std::vector<std::vector<Detection>> out;
    for (int n = 0; n < batch; ++n) out.push_back(predict(outputs, layout, anchors, n, options));
    return out;
}

}  // namespace gfd
