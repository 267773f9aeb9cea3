#pragma once

// Miss rate versus false positives per image, and the log-average miss rate
// sampled over FPPI in [1e-2, 1e0].

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gfd/box.hpp"
#include "gfd/detection.hpp"

namespace gfd {

struct EvalGroundTruth {
    Box box;
    bool ignore = false;
};

/// One detection after matching, kept in descending score order.
struct ScoredOutcome {
    double score = 0.0;
    bool true_positive = false;
};

struct ImageMatch {
    std::vector<ScoredOutcome> outcomes;  // detections matched to ignored gts are dropped
    int num_gts = 0;                      // non-ignored ground truths

    int true_positives(double threshold) const;
    int false_positives(double threshold) const;
    int false_negatives(double threshold) const { return num_gts - true_positives(threshold); }
};

/// Greedy matching in descending score order (ties by input order). A
/// detection takes the unmatched, non-ignored ground truth with the highest
/// IoU >= iou_threshold (ties to the lower index); failing that, a detection
/// overlapping an ignored ground truth is dropped; otherwise it is a false positive.
ImageMatch match_detections(std::span<const Detection> dets, std::span<const EvalGroundTruth> gts,
                            double iou_threshold);

std::vector<ImageMatch> match_detections(std::span<const std::vector<Detection>> dets,
                                         std::span<const std::vector<EvalGroundTruth>> gts,
                                         double iou_threshold);

struct CurvePoint {
    double fppi = 0.0;
    double miss_rate = 1.0;
    bool operator==(const CurvePoint&) const = default;
};

/// Sweeps every distinct detection score (plus the empty operating point),
/// keeps the lowest miss rate per FPPI value, sorted by FPPI. Throws
/// std::invalid_argument if there are no ground truths or no images.
std::vector<CurvePoint> miss_rate_fppi_curve(std::span<const ImageMatch> matches, int num_images);

/// FPPI sample points spaced evenly in log space over [1e-2, 1e0].
std::vector<double> fppi_sample_points(int count = 9);

/// exp(mean(log(max(m, 1e-10)))).
double geometric_mean_miss_rate(std::span<const double> miss_rates);

/// At each sample point, the lowest miss rate among curve points with
/// fppi <= sample (1.0 if there is none), then their geometric mean.
double log_average_miss_rate(std::span<const CurvePoint> curve, int samples = 9);

struct ImageCounts {
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

struct EvalResult {
    std::vector<CurvePoint> curve;
    double log_mr = 1.0;
    std::vector<ImageCounts> per_image;  // at the lowest score threshold
};

struct EvalOptions {
    double iou_threshold = 0.5;
    int fppi_samples = 9;
};

EvalResult evaluate(std::span<const std::vector<Detection>> dets,
                    std::span<const std::vector<EvalGroundTruth>> gts, const EvalOptions& options);

/// Evaluates only the images whose tag equals `tag`.
EvalResult evaluate_tagged(std::span<const std::vector<Detection>> dets,
                           std::span<const std::vector<EvalGroundTruth>> gts,
                           std::span<const std::string> tags, const std::string& tag,
                           const EvalOptions& options);

}  // namespace gfd
