#pragma once

// Independent recomputations shared by the unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "gfd/detection.hpp"
#include "gfd/metrics.hpp"

namespace gfd::oracles {

// Negatives sorted by loss, ties by index, first k kept, returned ascending.
inline std::vector<std::size_t> ohem_oracle(const std::vector<double>& loss, const Assignment& a, int ratio) {
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < loss.size(); ++i)
        if (a.labels[i] == Assignment::kNegative) neg.push_back(i);
    std::stable_sort(neg.begin(), neg.end(), [&](std::size_t x, std::size_t y) { return loss[x] > loss[y]; });
    const std::size_t k = std::min(neg.size(), static_cast<std::size_t>(ratio) * std::max(a.num_positive(), 1));
    neg.resize(k);
    std::sort(neg.begin(), neg.end());
    return neg;
}

using Dets = std::vector<std::vector<Detection>>;
using Gts = std::vector<std::vector<EvalGroundTruth>>;

struct Counts {
    int tp = 0;
    int fp = 0;
};

// Re-matches from scratch for a single score threshold.
inline Counts recount(const std::vector<Detection>& dets, const std::vector<EvalGroundTruth>& gts,
               double threshold, double iou_thr) {
    std::vector<std::pair<double, std::size_t>> kept;
    for (std::size_t i = 0; i < dets.size(); ++i)
        if (dets[i].score >= threshold) kept.push_back({dets[i].score, i});
    std::stable_sort(kept.begin(), kept.end(), [](auto a, auto b) { return a.first > b.first; });
    std::vector<bool> used(gts.size(), false);
    Counts c;
    for (auto [score, i] : kept) {
        int pick = -1;
        double best = 0.0;
        bool ignored = false;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const double v = iou(dets[i].box, gts[g].box);
            if (v < iou_thr) continue;
            if (gts[g].ignore) ignored = true;
            else if (!used[g] && (pick < 0 || v > best)) {
                pick = static_cast<int>(g);
                best = v;
            }
        }
        if (pick >= 0) {
            used[pick] = true;
            ++c.tp;
        } else if (!ignored) {
            ++c.fp;
        }
    }
    return c;
}

inline std::vector<CurvePoint> curve_oracle(const Dets& dets, const Gts& gts, double iou_thr) {
    int total = 0;
    std::set<double, std::greater<>> thresholds{std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < dets.size(); ++i) {
        for (const auto& g : gts[i]) total += g.ignore ? 0 : 1;
        for (const auto& d : dets[i]) thresholds.insert(d.score);
    }
    std::map<double, double> best;
    for (double t : thresholds) {
        int tp = 0, fp = 0;
        for (std::size_t i = 0; i < dets.size(); ++i) {
            const Counts c = recount(dets[i], gts[i], t, iou_thr);
            tp += c.tp;
            fp += c.fp;
        }
        const double fppi = static_cast<double>(fp) / dets.size();
        const double mr = static_cast<double>(total - tp) / total;
        auto it = best.find(fppi);
        if (it == best.end()) best[fppi] = mr;
        else it->second = std::min(it->second, mr);
    }
    std::vector<CurvePoint> out;
    for (auto [f, m] : best) out.push_back({f, m});
    return out;
}

inline double log_mr_oracle(const std::vector<CurvePoint>& curve) {
    double acc = 0.0;
    for (int i = 0; i < 9; ++i) {
        const double s = std::pow(10.0, -2.0 + i / 4.0);
        double m = 1.0;
        for (const auto& p : curve)
            if (p.fppi <= s) m = std::min(m, p.miss_rate);
        acc += std::log(std::max(m, 1e-10));
    }
    return std::exp(acc / 9.0);
}

}  // namespace gfd::oracles
