#include "gfd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gfd {

int ImageMatch::true_positives(double threshold) const {
    return static_cast<int>(std::count_if(outcomes.begin(), outcomes.end(), [&](const auto& o) {
        return o.true_positive && o.score >= threshold;
    }));
}

int ImageMatch::false_positives(double threshold) const {
    return static_cast<int>(std::count_if(outcomes.begin(), outcomes.end(), [&](const auto& o) {
        return !o.true_positive && o.score >= threshold;
    }));
}

ImageMatch match_detections(std::span<const Detection> dets, std::span<const EvalGroundTruth> gts,
                            double iou_threshold) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

    ImageMatch m;
    m.num_gts = static_cast<int>(
        std::count_if(gts.begin(), gts.end(), [](const auto& g) { return !g.ignore; }));
    std::vector<bool> taken(gts.size(), false);
    for (std::size_t d : order) {
        double best = -1.0;
        std::size_t best_g = gts.size();
        bool hits_ignored = false;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const double v = iou(dets[d].box, gts[g].box);
            if (v < iou_threshold) continue;
            if (gts[g].ignore) {
                hits_ignored = true;
                continue;
            }
            if (!taken[g] && v > best) {
                best = v;
                best_g = g;
            }
        }
        if (best_g < gts.size()) {
            taken[best_g] = true;
            m.outcomes.push_back({dets[d].score, true});
        } else if (!hits_ignored) {
            m.outcomes.push_back({dets[d].score, false});
        }
    }
    return m;
}

std::vector<ImageMatch> match_detections(std::span<const std::vector<Detection>> dets,
                                         std::span<const std::vector<EvalGroundTruth>> gts,
                                         double iou_threshold) {
    if (dets.size() != gts.size())
        throw std::invalid_argument("detections and ground truths cover different image counts");
    std::vector<ImageMatch> out(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i) out[i] = match_detections(dets[i], gts[i], iou_threshold);
    return out;
}

std::vector<CurvePoint> miss_rate_fppi_curve(std::span<const ImageMatch> matches, int num_images) {
    if (num_images < 1) throw std::invalid_argument("miss-rate curve needs at least one image");
    int total_gts = 0;
    std::vector<ScoredOutcome> all;
    for (const auto& m : matches) {
        total_gts += m.num_gts;
        all.insert(all.end(), m.outcomes.begin(), m.outcomes.end());
    }
    if (total_gts == 0) throw std::invalid_argument("miss-rate curve needs at least one ground truth");
    std::stable_sort(all.begin(), all.end(),
                     [](const auto& a, const auto& b) { return a.score > b.score; });

    std::vector<CurvePoint> curve{{0.0, 1.0}};
    auto push = [&curve](CurvePoint p) {
        if (curve.back().fppi == p.fppi)
            curve.back().miss_rate = std::min(curve.back().miss_rate, p.miss_rate);
        else
            curve.push_back(p);
    };
    int tp = 0, fp = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        (all[i].true_positive ? tp : fp) += 1;
        if (i + 1 < all.size() && all[i + 1].score == all[i].score) continue;
        push({static_cast<double>(fp) / num_images,
              static_cast<double>(total_gts - tp) / total_gts});
    }
    return curve;
}

std::vector<double> fppi_sample_points(int count) {
    if (count < 1) throw std::invalid_argument("need at least one FPPI sample point");
    if (count == 1) return {1e-2};
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = std::pow(10.0, -2.0 + 2.0 * i / (count - 1));
    return out;
}

double geometric_mean_miss_rate(std::span<const double> miss_rates) {
    if (miss_rates.empty()) throw std::invalid_argument("geometric mean of no miss rates");
    double acc = 0.0;
    for (double m : miss_rates) acc += std::log(std::max(m, 1e-10));
    return std::exp(acc / static_cast<double>(miss_rates.size()));
}

double log_average_miss_rate(std::span<const CurvePoint> curve, int samples) {
    if (curve.empty()) throw std::invalid_argument("log-average miss rate of an empty curve");
    std::vector<double> sampled;
    for (double s : fppi_sample_points(samples)) {
        double best = 1.0;
        for (const auto& p : curve)
            if (p.fppi <= s) best = std::min(best, p.miss_rate);
        sampled.push_back(best);
    }
    return geometric_mean_miss_rate(sampled);
}

EvalResult evaluate(std::span<const std::vector<Detection>> dets,
                    std::span<const std::vector<EvalGroundTruth>> gts, const EvalOptions& options) {
    const auto matches = match_detections(dets, gts, options.iou_threshold);
    EvalResult r;
    r.curve = miss_rate_fppi_curve(matches, static_cast<int>(matches.size()));
    r.log_mr = log_average_miss_rate(r.curve, options.fppi_samples);
    for (const auto& m : matches) {
        const double lowest = -1.0;
        r.per_image.push_back({m.true_positives(lowest), m.false_positives(lowest),
                               m.false_negatives(lowest)});
    }
    return r;
}

EvalResult evaluate_tagged(std::span<const std::vector<Detection>> dets,
                           std::span<const std::vector<EvalGroundTruth>> gts,
                           std::span<const std::string> tags, const std::string& tag,
                           const EvalOptions& options) {
    if (tags.size() != dets.size() || gts.size() != dets.size())
        throw std::invalid_argument("tags, detections and ground truths differ in image count");
    std::vector<std::vector<Detection>> sub_dets;
    std::vector<std::vector<EvalGroundTruth>> sub_gts;
    for (std::size_t i = 0; i < tags.size(); ++i)
        if (tags[i] == tag) {
            sub_dets.push_back(dets[i]);
            sub_gts.push_back(gts[i]);
        }
    return evaluate(sub_dets, sub_gts, options);
}

}  // namespace gfd
