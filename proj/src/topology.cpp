#include "gfd/topology.hpp"

#include <cmath>
#include <stdexcept>

#include "gfd/init.hpp"
#include "gfd/ops.hpp"

namespace gfd {

void validate_geometry(const Geometry& g) {
    if (g.levels.empty()) throw std::invalid_argument("geometry has no pyramid levels");
    for (std::size_t k = 0; k < g.levels.size(); ++k) {
        const auto& l = g.levels[k];
        if (l.height < 1 || l.width < 1 || l.channels < 1)
            throw std::invalid_argument("level " + l.name + " has a non-positive extent");
        if (l.anchors_per_loc != 4 && l.anchors_per_loc != 6)
            throw std::invalid_argument("level " + l.name + ": anchors_per_loc must be 4 or 6");
        if (k > 0 && (l.height > g.levels[k - 1].height || l.width > g.levels[k - 1].width))
            throw std::invalid_argument("level " + l.name + " is larger than the level before it");
    }
}

Geometry reference_geometry(int input_size) {
    Geometry g;
    g.input_size = input_size;
    if (input_size == 300) {
        const int spatial[] = {38, 19, 10, 5, 3, 1};
        const int anchors[] = {4, 6, 6, 6, 4, 4};
        const char* names[] = {"conv4_3", "conv7", "conv8_2", "conv9_2", "conv10_2", "conv11_2"};
        for (int k = 0; k < 6; ++k) g.levels.push_back({names[k], spatial[k], spatial[k], 512, anchors[k]});
    } else if (input_size == 512) {
        const int spatial[] = {64, 32, 16, 8, 4, 2, 1};
        const int anchors[] = {4, 6, 6, 6, 6, 4, 4};
        const char* names[] = {"conv4_3", "conv7", "conv8_2", "conv9_2",
                               "conv10_2", "conv11_2", "conv12_2"};
        for (int k = 0; k < 7; ++k) g.levels.push_back({names[k], spatial[k], spatial[k], 512, anchors[k]});
    } else {
        throw std::invalid_argument("unsupported reference input size " +
                                    std::to_string(input_size) + " (expected 300 or 512)");
    }
    return g;
}

Geometry toy_geometry(int input_size, std::span<const int> spatial, std::span<const int> anchors,
                      int channels) {
    if (spatial.size() != anchors.size())
        throw std::invalid_argument("toy geometry: " + std::to_string(spatial.size()) +
                                    " level sizes but " + std::to_string(anchors.size()) +
                                    " anchor counts");
    Geometry g;
    g.input_size = input_size;
    for (std::size_t k = 0; k < spatial.size(); ++k)
        g.levels.push_back({"level" + std::to_string(k), spatial[k], spatial[k], channels, anchors[k]});
    validate_geometry(g);
    return g;
}

Geometry scale_geometry(const Geometry& g, int divisor) {
    if (divisor < 1) throw std::invalid_argument("scale divisor must be positive");
    Geometry out = g;
    out.input_size = (g.input_size + divisor - 1) / divisor;
    for (auto& l : out.levels) {
        l.height = (l.height + divisor - 1) / divisor;
        l.width = (l.width + divisor - 1) / divisor;
    }
    return out;
}

std::string to_string(FusionVariant v) {
    switch (v) {
        case FusionVariant::single: return "single";
        case FusionVariant::stack: return "stack";
        case FusionVariant::gated: return "gated";
        case FusionVariant::mixed_even: return "mixed_even";
        case FusionVariant::mixed_odd: return "mixed_odd";
        case FusionVariant::mixed_early: return "mixed_early";
        case FusionVariant::mixed_late: return "mixed_late";
    }
    return "?";
}

std::vector<FusionVariant> all_variants() {
    return {FusionVariant::single,     FusionVariant::stack,     FusionVariant::gated,
            FusionVariant::mixed_even, FusionVariant::mixed_odd, FusionVariant::mixed_early,
            FusionVariant::mixed_late};
}

FusionVariant parse_variant(const std::string& text) {
    for (auto v : all_variants())
        if (to_string(v) == text) return v;
    throw std::invalid_argument("unknown fusion variant '" + text +
                                "' (expected single, stack, gated, mixed_even, mixed_odd, "
                                "mixed_early or mixed_late)");
}

std::string stream_suffix(Stream s) {
    switch (s) {
        case Stream::Single: return "";
        case Stream::Color: return "_C";
        case Stream::Thermal: return "_T";
        case Stream::Gated: return "_G";
    }
    return "";
}

std::vector<HeadMap> FusionTopology::head_maps() const {
    std::vector<HeadMap> maps;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const int level = static_cast<int>(k);
        switch (modes[k]) {
            case LevelMode::Single: maps.push_back({level, Stream::Single}); break;
            case LevelMode::Gated: maps.push_back({level, Stream::Gated}); break;
            case LevelMode::Stacked:
                maps.push_back({level, Stream::Color});
                maps.push_back({level, Stream::Thermal});
                break;
        }
    }
    return maps;
}

int FusionTopology::gated_level_count() const {
    int n = 0;
    for (auto m : modes) n += m == LevelMode::Gated;
    return n;
}

FusionTopology build_topology(FusionVariant variant, const Geometry& geometry,
                              GfuVersion gfu_version) {
    validate_geometry(geometry);
    FusionTopology t;
    t.variant = variant;
    t.gfu_version = gfu_version;
    t.geometry = geometry;
    const int levels = static_cast<int>(geometry.levels.size());
    // The early/late split puts the extra seventh level of SSD512 on the late side.
    const int early = levels / 2;
    for (int k = 0; k < levels; ++k) {
        bool gated = false;
        switch (variant) {
            case FusionVariant::single: t.modes.push_back(LevelMode::Single); continue;
            case FusionVariant::stack: gated = false; break;
            case FusionVariant::gated: gated = true; break;
            case FusionVariant::mixed_even: gated = k % 2 == 0; break;
            case FusionVariant::mixed_odd: gated = k % 2 == 1; break;
            case FusionVariant::mixed_early: gated = k < early; break;
            case FusionVariant::mixed_late: gated = k >= early; break;
        }
        t.modes.push_back(gated ? LevelMode::Gated : LevelMode::Stacked);
    }
    return t;
}

std::int64_t anchor_count(const FusionTopology& t) {
    std::int64_t total = 0;
    for (std::size_t k = 0; k < t.modes.size(); ++k) {
        const auto& l = t.geometry.levels[k];
        const int multiplier = t.modes[k] == LevelMode::Stacked ? 2 : 1;
        total += multiplier * l.locations() * l.anchors_per_loc;
    }
    return total;
}

namespace {

double level_scale(int k, int num_levels, ScaleRange s) {
    if (num_levels <= 1) return s.min;
    return s.min + (s.max - s.min) * k / (num_levels - 1);
}

}  // namespace

std::vector<Box> location_anchors(int k, int num_levels, int anchors_per_loc, ScaleRange scales,
                                  double cx, double cy) {
    const double s = level_scale(k, num_levels, scales);
    const double s_next = std::min(1.0, level_scale(k + 1, num_levels, scales));
    std::vector<Box> out;
    out.push_back({cx, cy, s, s});
    const double extra = std::sqrt(s * s_next);
    out.push_back({cx, cy, extra, extra});
    const double ratios4[] = {2.0, 0.5};
    const double ratios6[] = {2.0, 0.5, 3.0, 1.0 / 3.0};
    std::span<const double> ratios = anchors_per_loc == 6 ? std::span<const double>(ratios6)
                                                          : std::span<const double>(ratios4);
    for (double ar : ratios) {
        const double r = std::sqrt(ar);
        out.push_back({cx, cy, s * r, s / r});
    }
    return out;
}

std::vector<Box> enumerate_anchors(const FusionTopology& t, ScaleRange scales) {
    if (!(scales.min > 0.0 && scales.min < scales.max && scales.max <= 1.0))
        throw std::invalid_argument("anchor scales need 0 < min < max <= 1");
    const int num_levels = static_cast<int>(t.geometry.levels.size());
    std::vector<Box> anchors;
    anchors.reserve(static_cast<std::size_t>(anchor_count(t)));
    for (const HeadMap& m : t.head_maps()) {
        const auto& l = t.geometry.levels[m.level];
        for (int y = 0; y < l.height; ++y)
            for (int x = 0; x < l.width; ++x) {
                const double cx = (x + 0.5) / l.width;
                const double cy = (y + 0.5) / l.height;
                auto boxes = location_anchors(m.level, num_levels, l.anchors_per_loc, scales, cx, cy);
                anchors.insert(anchors.end(), boxes.begin(), boxes.end());
            }
    }
    return anchors;
}

namespace {

struct Transition {
    int stride;
    int padding;
};

// 3x3 convolution settings mapping extent `from` onto `to`.
Transition transition(int from, int to) {
    if ((from + 1) / 2 == to && from > 1) return {2, 1};
    if (from - 2 == to) return {1, 0};
    if (from == to) return {1, 1};
    throw std::invalid_argument("cannot reach a " + std::to_string(to) + "-wide map from " +
                                std::to_string(from) + " with one 3x3 convolution");
}

ToyBackbone::Layer make_layer(const std::string& name, int out_ch, int in_ch, Transition tr,
                              std::mt19937_64& rng) {
    return {make_conv_weight(name + ".weight", out_ch, in_ch, 3, rng),
            make_conv_bias(name + ".bias", out_ch), tr.stride, tr.padding};
}

Tensor apply(const ToyBackbone::Layer& l, const Tensor& x) {
    return relu(conv2d(x, l.weight, l.bias, l.stride, l.padding));
}

}  // namespace

ToyBackbone::ToyBackbone(int in_channels, const Geometry& geometry, int stem_channels,
                         std::mt19937_64& rng, const std::string& prefix)
    : in_channels_(in_channels) {
    validate_geometry(geometry);
    const auto& first = geometry.levels.front();
    if (first.height != first.width)
        throw std::invalid_argument("toy backbone needs square pyramid levels");

    // Halve the input until one more halving reaches the first level.
    int extent = geometry.input_size;
    int channels = in_channels;
    int stage = 0;
    while ((extent + 1) / 2 > first.height) {
        const int next = (extent + 1) / 2;
        stem_.push_back(make_layer(prefix + ".stem" + std::to_string(stage++), stem_channels,
                                   channels, transition(extent, next), rng));
        extent = next;
        channels = stem_channels;
    }
    for (const auto& level : geometry.levels) {
        if (level.height != level.width)
            throw std::invalid_argument("toy backbone needs square pyramid levels");
        taps_.push_back(make_layer(prefix + "." + level.name, level.channels, channels,
                                   transition(extent, level.height), rng));
        extent = level.height;
        channels = level.channels;
    }
}

std::vector<Tensor> ToyBackbone::forward(const Tensor& image) const {
    if (image.shape().c != in_channels_)
        throw ShapeError("backbone expects " + std::to_string(in_channels_) +
                         "-channel input, got " + image.shape().str());
    Tensor x = image;
    for (const auto& l : stem_) x = apply(l, x);
    std::vector<Tensor> maps;
    for (const auto& l : taps_) {
        x = apply(l, x);
        maps.push_back(x);
    }
    return maps;
}

std::vector<Parameter*> ToyBackbone::parameters() {
    std::vector<Parameter*> out;
    for (auto* group : {&stem_, &taps_})
        for (auto& l : *group) {
            out.push_back(&l.weight);
            out.push_back(&l.bias);
        }
    return out;
}

std::vector<Tensor> forward_pyramid(const Tensor& color, const Tensor& thermal,
                                    const ToyBackbone* color_backbone,
                                    const ToyBackbone* thermal_backbone,
                                    std::span<const GfuParams> gfus, const FusionTopology& t) {
    const int input = t.geometry.input_size;
    auto check_input = [input](const Tensor& x, const char* which) {
        if (x.shape().h != input || x.shape().w != input)
            throw ShapeError(std::string(which) + " input " + x.shape().str() +
                             " does not match the geometry's " + std::to_string(input) + "x" +
                             std::to_string(input) + " input");
    };

    std::vector<Tensor> color_maps, thermal_maps;
    if (t.variant == FusionVariant::single) {
        if ((color_backbone == nullptr) == (thermal_backbone == nullptr))
            throw std::invalid_argument("single variant needs exactly one backbone");
    } else {
        if (!color_backbone || !thermal_backbone)
            throw std::invalid_argument(to_string(t.variant) + " variant needs both backbones");
        if (color.shape().n != thermal.shape().n)
            throw ShapeError("color and thermal batches differ: " + color.shape().str() + " vs " +
                             thermal.shape().str());
    }
    if (color_backbone) {
        check_input(color, "color");
        color_maps = color_backbone->forward(color);
    }
    if (thermal_backbone) {
        check_input(thermal, "thermal");
        thermal_maps = thermal_backbone->forward(thermal);
    }
    if (static_cast<int>(gfus.size()) != t.gated_level_count())
        throw std::invalid_argument("topology has " + std::to_string(t.gated_level_count()) +
                                    " gated levels but " + std::to_string(gfus.size()) +
                                    " GFUs were supplied");

    std::vector<Tensor> out;
    std::size_t next_gfu = 0;
    for (const HeadMap& m : t.head_maps()) {
        switch (m.stream) {
            case Stream::Single:
                out.push_back(color_backbone ? color_maps[m.level] : thermal_maps[m.level]);
                break;
            case Stream::Color: out.push_back(color_maps[m.level]); break;
            case Stream::Thermal: out.push_back(thermal_maps[m.level]); break;
            case Stream::Gated:
                out.push_back(gfu_forward(color_maps[m.level], thermal_maps[m.level], gfus[next_gfu++]));
                break;
        }
    }
    return out;
}

}  // namespace gfd
