#pragma once

// Detection heads, anchor/ground-truth matching, NMS and inference.
//
// Each head is one 3x3 convolution emitting 6 channels per anchor:
// (background logit, foreground logit, tx, ty, tw, th). For anchor a the
// channels are [6a, 6a + 6).

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gfd/box.hpp"
#include "gfd/ops.hpp"
#include "gfd/topology.hpp"

namespace gfd {

inline constexpr int kHeadFields = 6;
inline constexpr int kBackgroundField = 0;
inline constexpr int kForegroundField = 1;
inline constexpr int kOffsetField = 2;

struct Detection {
    Box box;
    double score = 0.0;
};

/// Per-anchor label: a ground-truth index (positive), or one of the
/// sentinels below.
struct Assignment {
    static constexpr int kNegative = -1;
    static constexpr int kIgnore = -2;

    std::vector<int> labels;

    bool is_positive(std::size_t anchor) const { return labels[anchor] >= 0; }
    bool is_negative(std::size_t anchor) const { return labels[anchor] == kNegative; }
    int num_positive() const;
    int num_negative() const;
};

/// (a) every ground truth claims its best-overlapping anchor (greedy by IoU,
/// ties to the lower anchor index); (b) any other anchor whose best IoU is at
/// least `iou_threshold` becomes positive for that ground truth. Anchors
/// whose best match is a ground truth flagged in `gt_ignore` are ignored
/// instead. Everything else is negative.
Assignment match_anchors(std::span<const Box> anchors, std::span<const Box> gts,
                         double iou_threshold, std::span<const bool> gt_ignore = {});

/// Greedy suppression in descending score order (ties by input order) of any
/// box with IoU > iou_threshold against an already kept box.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold);

/// Maps global anchor indices to locations inside the head output tensors.
class AnchorLayout {
public:
    AnchorLayout() = default;
    explicit AnchorLayout(const FusionTopology& t);

    std::size_t anchor_count() const { return total_; }
    std::size_t head_count() const { return maps_.size(); }
    int anchors_per_loc(std::size_t head) const { return maps_[head].anchors; }

    /// Position of field `field` of `anchor` for batch element `image`.
    GatherIndex index(int image, std::size_t anchor, int field) const;

    /// Output shape expected from head `head` for a batch of `batch`.
    Shape head_shape(std::size_t head, int batch) const;

private:
    struct Map {
        std::size_t first = 0;
        int anchors = 0;
        int height = 0;
        int width = 0;
    };
    std::vector<Map> maps_;
    std::vector<std::size_t> starts_;
    std::size_t total_ = 0;
};

/// One 3x3 head per head-feeding map; Stacked modality pairs do not share weights.
class DetectionHeads {
public:
    DetectionHeads() = default;
    DetectionHeads(const FusionTopology& t, std::mt19937_64& rng, const std::string& prefix = "head");

    std::vector<Tensor> forward(std::span<const Tensor> head_maps) const;
    std::vector<Parameter*> parameters();
    std::size_t size() const { return heads_.size(); }

private:
    struct Head {
        Parameter weight;
        Parameter bias;
    };
    std::vector<Head> heads_;
};

struct PredictOptions {
    double score_threshold = 0.01;
    double nms_threshold = 0.45;
    std::size_t pre_nms_top_k = 200;
    std::size_t max_detections = 100;
};

/// Detections for one batch element: foreground softmax score per anchor,
/// keep scores strictly above the threshold, decode, then NMS.
std::vector<Detection> predict(std::span<const Tensor> head_outputs, const AnchorLayout& layout,
                               std::span<const Box> anchors, int image,
                               const PredictOptions& options);

/// Runs the heads first, then predicts every batch element.
std::vector<std::vector<Detection>> predict(std::span<const Tensor> head_maps,
                                            const DetectionHeads& heads,
                                            const AnchorLayout& layout,
                                            std::span<const Box> anchors,
                                            const PredictOptions& options);

}  // namespace gfd
