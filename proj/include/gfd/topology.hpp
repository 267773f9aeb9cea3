#pragma once

// Feature-pyramid geometry, the seven fusion structures, anchor accounting
// and the twin toy backbone that feeds them.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gfd/box.hpp"
#include "gfd/gfu.hpp"
#include "gfd/tensor.hpp"

namespace gfd {

struct PyramidLevel {
    std::string name;
    int height = 0;
    int width = 0;
    int channels = 0;
    int anchors_per_loc = 0;

    std::int64_t locations() const { return static_cast<std::int64_t>(height) * width; }
};

struct Geometry {
    int input_size = 0;
    std::vector<PyramidLevel> levels;
};

/// Validates level ordering and anchor counts; throws std::invalid_argument.
void validate_geometry(const Geometry& g);

/// SSD300 (6 levels) or SSD512 (7 levels, adds conv12_2) default-box grids.
Geometry reference_geometry(int input_size);

/// A small square geometry for training, e.g. input 64 with levels 8,4,2,1.
Geometry toy_geometry(int input_size, std::span<const int> spatial, std::span<const int> anchors,
                      int channels);

/// Every level's H and W replaced by ceil(H/d), ceil(W/d).
Geometry scale_geometry(const Geometry& g, int divisor);

enum class FusionVariant { single, stack, gated, mixed_even, mixed_odd, mixed_early, mixed_late };

std::string to_string(FusionVariant v);
FusionVariant parse_variant(const std::string& text);
std::vector<FusionVariant> all_variants();

enum class LevelMode { Single, Stacked, Gated };

/// Where a head-feeding map comes from.
enum class Stream { Single, Color, Thermal, Gated };

/// "" for single-modality maps, "_C", "_T", "_G" otherwise.
std::string stream_suffix(Stream s);

struct HeadMap {
    int level = 0;
    Stream stream = Stream::Single;
};

struct FusionTopology {
    FusionVariant variant = FusionVariant::single;
    GfuVersion gfu_version = GfuVersion::v2;
    Geometry geometry;
    std::vector<LevelMode> modes;

    /// One entry per Single/Gated level and two (color, thermal) per Stacked
    /// level, in level order.
    std::vector<HeadMap> head_maps() const;
    int gated_level_count() const;
};

FusionTopology build_topology(FusionVariant variant, const Geometry& geometry,
                              GfuVersion gfu_version);

/// Sum over levels of multiplier * H * W * anchors_per_loc, where the
/// multiplier is 2 for Stacked levels and 1 otherwise.
std::int64_t anchor_count(const FusionTopology& t);

struct ScaleRange {
    double min = 0.2;
    double max = 0.9;
};

/// Default boxes in head-map order; within a map, row-major locations with
/// the anchors of one location contiguous. Stacked levels therefore appear
/// twice, once per modality head.
std::vector<Box> enumerate_anchors(const FusionTopology& t, ScaleRange scales);

/// Default boxes of a single location on level `k` of `num_levels`.
std::vector<Box> location_anchors(int k, int num_levels, int anchors_per_loc, ScaleRange scales,
                                  double cx, double cy);

/// Per-modality conv+relu stack. Stride-2 convolutions bring the input down
/// to the first pyramid level; each further level is tapped after one more
/// downsampling convolution.
class ToyBackbone {
public:
    struct Layer {
        Parameter weight;
        Parameter bias;
        int stride = 1;
        int padding = 0;
    };

    ToyBackbone() = default;
    ToyBackbone(int in_channels, const Geometry& geometry, int stem_channels, std::mt19937_64& rng,
                const std::string& prefix);

    /// Pyramid maps, one per level.
    std::vector<Tensor> forward(const Tensor& image) const;

    std::vector<Parameter*> parameters();
    int in_channels() const { return in_channels_; }

private:
    int in_channels_ = 0;
    std::vector<Layer> stem_;
    std::vector<Layer> taps_;  // taps_[k] produces level k
};

/// Feature maps ready for the detection heads, ordered as
/// FusionTopology::head_maps(). `gfus` holds one unit per Gated level in
/// level order. For the single variant exactly one backbone is non-null.
std::vector<Tensor> forward_pyramid(const Tensor& color, const Tensor& thermal,
                                    const ToyBackbone* color_backbone,
                                    const ToyBackbone* thermal_backbone,
                                    std::span<const GfuParams> gfus, const FusionTopology& t);

}  // namespace gfd
