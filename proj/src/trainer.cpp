#include "gfd/trainer.hpp"

#include <charconv>
#include <cmath>
#include <random>

#include "gfd/enhance.hpp"
#include "gfd/optim.hpp"

namespace gfd {

TrainingError::TrainingError(int step, const std::string& message)
    : std::runtime_error("training aborted at step " + std::to_string(step) + ": " + message),
      step_(step) {}

const char* const kTrainLogHeader = "step,L_cls,L_loc,L2,L_total,N_pos,N_neg";

namespace {

std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void permute(std::vector<std::size_t>& order, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
}

}  // namespace

std::string format_log_row(int step, const LossBreakdown& b) {
    return std::to_string(step) + "," + shortest(b.cls) + "," + shortest(b.loc) + "," +
           shortest(b.l2) + "," + shortest(b.total) + "," + std::to_string(b.n_pos) + "," +
           std::to_string(b.n_neg);
}

std::vector<Box> training_boxes(std::span<const GroundTruth> gts, int width, int height) {
    std::vector<Box> out;
    out.reserve(gts.size());
    for (const auto& g : gts) out.push_back(normalize(g.rect, width, height));
    return out;
}

Sample preprocess(const Sample& s, const PreprocessOptions& options) {
    Sample out = s;
    if (options.enhance_thermal)
        out.pair.thermal = clahe(s.pair.thermal, options.clahe_tiles, options.clahe_tiles,
                                 options.clahe_clip);
    return out;
}

TrainResult train(Detector& model, std::span<const Sample> data, const TrainOptions& options,
                  std::ostream* log) {
    if (data.empty()) throw std::invalid_argument("training set is empty");
    if (options.steps < 1) throw std::invalid_argument("steps must be at least 1");
    if (options.batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");

    std::vector<Sample> prepared;
    prepared.reserve(data.size());
    for (const auto& s : data) prepared.push_back(preprocess(s, options.preprocess));

    auto params = model.parameters();
    SgdOptimizer optimizer(options.learning_rate, options.momentum);
    std::mt19937_64 order_rng(options.seed);
    std::vector<std::size_t> order(prepared.size());
    std::size_t cursor = order.size();
    std::uint64_t epoch = 0;
    bool started = false;

    TrainResult result;
    result.history.reserve(options.steps);
    if (log) *log << kTrainLogHeader << "\n";

    for (int step = 1; step <= options.steps; ++step) {
        std::vector<Sample> batch;
        batch.reserve(options.batch_size);
        for (int b = 0; b < options.batch_size; ++b) {
            if (cursor == order.size()) {
                if (started) ++epoch;
                started = true;
                permute(order, order_rng);
                cursor = 0;
            }
            const Sample& s = prepared[order[cursor++]];
            if (!options.augment) {
                batch.push_back(s);
                continue;
            }
            Augmented a = augment(s.pair, s.gts, sample_seed(options.seed, s.pair.id, epoch),
                                  options.augment_options);
            for (auto& w : a.warnings) result.warnings.push_back(s.pair.id + ": " + w);
            batch.push_back({std::move(a.pair), std::move(a.gts)});
        }

        std::vector<const Image*> colors, thermals;
        std::vector<std::vector<Box>> boxes;
        for (const auto& s : batch) {
            colors.push_back(&s.pair.color);
            thermals.push_back(&s.pair.thermal);
            boxes.push_back(training_boxes(s.gts, s.pair.width(), s.pair.height()));
        }
        const Tensor color = images_to_tensor(colors);
        const Tensor thermal = images_to_tensor(thermals);

        LossTerms terms;
        try {
            const auto outputs = model.forward(color, thermal);
            const auto selection = select_training_anchors(outputs, model.layout(), model.anchors(),
                                                           boxes, options.match_iou,
                                                           options.ohem_ratio);
            terms = detection_loss(outputs, model.layout(), selection, params, options.weights);
            if (!std::isfinite(terms.breakdown.total))
                throw NonFiniteLoss("L_total", terms.breakdown.total);
        } catch (const NonFiniteLoss& e) {
            throw TrainingError(step, e.what());
        }
        terms.total.backward();
        optimizer.step(params);

        result.history.push_back(terms.breakdown);
        if (log) *log << format_log_row(step, terms.breakdown) << "\n";
    }
    if (log) log->flush();
    return result;
}

std::vector<EvalGroundTruth> eval_ground_truths(std::span<const GroundTruth> gts, int width,
                                                int height, const EvalSettings& settings) {
    std::vector<EvalGroundTruth> out;
    out.reserve(gts.size());
    for (const auto& g : gts) {
        const bool ignore = settings.ignore_classes.count(g.raw_class) > 0 ||
                            g.rect.h < settings.min_gt_height;
        out.push_back({normalize(g.rect, width, height), ignore});
    }
    return out;
}

ModelEvaluation evaluate_model(const Detector& model, std::span<const Sample> data,
                               const EvalSettings& settings) {
    if (settings.batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
    ModelEvaluation out;
    std::vector<std::vector<EvalGroundTruth>> gts;
    for (std::size_t start = 0; start < data.size(); start += settings.batch_size) {
        const std::size_t end = std::min(data.size(), start + settings.batch_size);
        std::vector<Sample> batch;
        std::vector<const Image*> colors, thermals;
        for (std::size_t i = start; i < end; ++i) batch.push_back(preprocess(data[i], settings.preprocess));
        for (const auto& s : batch) {
            colors.push_back(&s.pair.color);
            thermals.push_back(&s.pair.thermal);
            gts.push_back(eval_ground_truths(s.gts, s.pair.width(), s.pair.height(), settings));
        }
        auto dets = model.detect(images_to_tensor(colors), images_to_tensor(thermals),
                                 settings.predict);
        for (auto& d : dets) out.detections.push_back(std::move(d));
    }
    out.result = evaluate(out.detections, gts, settings.metrics);
    return out;
}

}  // namespace gfd
