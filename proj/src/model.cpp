#include "gfd/model.hpp"

#include <cstdio>
#include <random>
#include <stdexcept>

#include "gfd/hash.hpp"

namespace gfd {

std::string to_string(Modality m) { return m == Modality::color ? "color" : "thermal"; }

Modality parse_modality(const std::string& text) {
    if (text == "color") return Modality::color;
    if (text == "thermal") return Modality::thermal;
    throw std::invalid_argument("unknown modality '" + text + "' (expected color or thermal)");
}

Geometry ModelConfig::geometry() const {
    if (reference_size != 0) return reference_geometry(reference_size);
    Geometry g = toy_geometry(input_size, level_sizes, anchors_per_loc, level_channels);
    return g;
}

std::string ModelConfig::describe() const {
    auto join = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    char scales_buf[64];
    std::snprintf(scales_buf, sizeof scales_buf, "%.17g,%.17g", scales.min, scales.max);
    std::string s = "variant=" + to_string(variant) + ";gfu=" + to_string(gfu_version);
    if (variant == FusionVariant::single) s += ";modality=" + to_string(single_modality);
    if (reference_size != 0) {
        s += ";reference=" + std::to_string(reference_size);
    } else {
        s += ";input=" + std::to_string(input_size) + ";levels=" + join(level_sizes) +
             ";anchors=" + join(anchors_per_loc) + ";channels=" + std::to_string(level_channels);
    }
    s += ";stem=" + std::to_string(stem_channels) + ";scales=" + scales_buf;
    return s;
}

std::string ModelConfig::fingerprint() const { return hex64(fnv1a64(describe())); }

Detector::Detector(const ModelConfig& config, std::uint64_t seed) : config_(config) {
    Geometry g = config.geometry();
    if (config.reference_size != 0)
        for (auto& l : g.levels) l.channels = config.level_channels;
    topology_ = build_topology(config.variant, g, config.gfu_version);

    std::mt19937_64 rng(seed);
    const bool single = config.variant == FusionVariant::single;
    if (!single || config.single_modality == Modality::color)
        color_.emplace(3, g, config.stem_channels, rng, "color");
    if (!single || config.single_modality == Modality::thermal)
        thermal_.emplace(1, g, config.stem_channels, rng, "thermal");
    for (std::size_t k = 0; k < topology_.modes.size(); ++k)
        if (topology_.modes[k] == LevelMode::Gated)
            gfus_.push_back(init_gfu_params(g.levels[k].channels, config.gfu_version, rng(),
                                            "gfu." + g.levels[k].name));
    heads_ = DetectionHeads(topology_, rng, "head");
    layout_ = AnchorLayout(topology_);
    anchors_ = enumerate_anchors(topology_, config.scales);
}

std::vector<Tensor> Detector::forward_pyramid(const Tensor& color, const Tensor& thermal) const {
    return gfd::forward_pyramid(color, thermal, color_ ? &*color_ : nullptr,
                                thermal_ ? &*thermal_ : nullptr, gfus_, topology_);
}

std::vector<Tensor> Detector::forward(const Tensor& color, const Tensor& thermal) const {
    const auto maps = forward_pyramid(color, thermal);
    return heads_.forward(maps);
}

std::vector<std::vector<Detection>> Detector::detect(const Tensor& color, const Tensor& thermal,
                                                     const PredictOptions& options) const {
    const auto outputs = forward(color, thermal);
    const int batch = outputs.front().shape().n;
    std::vector<std::vector<Detection>> out;
    out.reserve(batch);
    for (int n = 0; n < batch; ++n) out.push_back(predict(outputs, layout_, anchors_, n, options));
    return out;
}

std::vector<Parameter*> Detector::parameters() {
    std::vector<Parameter*> out;
    auto append = [&out](std::vector<Parameter*> ps) { out.insert(out.end(), ps.begin(), ps.end()); };
    if (color_) append(color_->parameters());
    if (thermal_) append(thermal_->parameters());
    for (auto& g : gfus_) append(g.parameters());
    append(heads_.parameters());
    return out;
}

Tensor images_to_tensor(std::span<const Image* const> images) {
    if (images.empty()) throw std::invalid_argument("cannot stack an empty image batch");
    const Image& first = *images.front();
    const Shape shape{static_cast<int>(images.size()), first.channels, first.height, first.width};
    std::vector<double> values(shape.numel());
    const std::size_t plane = static_cast<std::size_t>(first.width) * first.height;
    for (std::size_t n = 0; n < images.size(); ++n) {
        const Image& img = *images[n];
        if (img.width != first.width || img.height != first.height || img.channels != first.channels)
            throw ShapeError("images in one batch differ in size");
        for (std::size_t p = 0; p < plane; ++p)
            for (int c = 0; c < img.channels; ++c)
                values[(n * img.channels + c) * plane + p] =
                    img.pixels[p * img.channels + c] / 255.0 - 0.5;
    }
    return Tensor::from_values(shape, std::move(values));
}

}  // namespace gfd
