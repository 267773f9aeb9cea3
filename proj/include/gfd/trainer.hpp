#pragma once

#include <cstdint>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfd/augment.hpp"
#include "gfd/dataset.hpp"
#include "gfd/loss.hpp"
#include "gfd/metrics.hpp"
#include "gfd/model.hpp"

namespace gfd {

/// Applied identically before training and evaluation.
struct PreprocessOptions {
    bool enhance_thermal = false;
    int clahe_tiles = 8;
    double clahe_clip = 2.0;
};

struct TrainOptions {
    LossWeights weights;
    int ohem_ratio = 3;
    double match_iou = 0.5;
    double learning_rate = 0.001;
    double momentum = 0.0;
    int steps = 1000;
    int batch_size = 4;
    std::uint64_t seed = 0;
    bool augment = true;
    AugmentOptions augment_options;
    PreprocessOptions preprocess;
};

class TrainingError : public std::runtime_error {
public:
    TrainingError(int step, const std::string& message);
    int step() const { return step_; }

private:
    int step_;
};

extern const char* const kTrainLogHeader;
std::string format_log_row(int step, const LossBreakdown& b);

struct TrainResult {
    std::vector<LossBreakdown> history;  // one per step
    std::vector<std::string> warnings;
    LossBreakdown last() const { return history.back(); }
};

/// Runs options.steps SGD steps. Each epoch visits the data in a seeded
/// permutation; a final partial batch wraps into the next epoch.
/// Writes kTrainLogHeader and one row per step when `log` is set.
TrainResult train(Detector& model, std::span<const Sample> data, const TrainOptions& options,
                  std::ostream* log = nullptr);

/// Pedestrian boxes of one sample, normalized.
std::vector<Box> training_boxes(std::span<const GroundTruth> gts, int width, int height);

Sample preprocess(const Sample& s, const PreprocessOptions& options);

struct EvalSettings {
    PredictOptions predict;
    EvalOptions metrics;
    std::set<RawClass> ignore_classes;
    double min_gt_height = 0.0;  // pixels; shorter ground truths become ignore
    int batch_size = 16;
    PreprocessOptions preprocess;
};

struct ModelEvaluation {
    EvalResult result;
    std::vector<std::vector<Detection>> detections;  // normalized boxes, per image
};

std::vector<EvalGroundTruth> eval_ground_truths(std::span<const GroundTruth> gts, int width,
                                                int height, const EvalSettings& settings);

ModelEvaluation evaluate_model(const Detector& model, std::span<const Sample> data,
                               const EvalSettings& settings);

}  // namespace gfd
