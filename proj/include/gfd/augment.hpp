#pragma once

// Training-time augmentation of an aligned image pair. Each transform fires
// independently with `probability`:
//   color only:      brightness, contrast, hue, saturation, channel order
//   both modalities: horizontal flip, letterboxed resize
// Box coordinates follow the geometric transforms.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gfd/annotation.hpp"
#include "gfd/image.hpp"

namespace gfd {

struct AugmentOptions {
    double probability = 0.5;
    double brightness_delta = 32.0;
    double contrast_min = 0.5, contrast_max = 1.5;
    double hue_delta = 18.0 / 180.0;  // fraction of the hue circle
    double saturation_min = 0.5, saturation_max = 1.5;
    double scale_min = 0.8, scale_max = 1.2;
};

/// Every random draw of one augmentation, made up front in a fixed order.
struct AugmentPlan {
    bool brightness = false;
    double brightness_shift = 0.0;
    bool contrast = false;
    double contrast_factor = 1.0;
    bool hue = false;
    double hue_shift = 0.0;
    bool saturation = false;
    double saturation_factor = 1.0;
    bool permute = false;
    std::array<int, 3> channel_order{0, 1, 2};
    bool flip = false;
    bool resize = false;
    double resize_scale = 1.0;

    bool is_identity() const {
        return !(brightness || contrast || hue || saturation || permute || flip || resize);
    }
};

AugmentPlan plan_augmentation(std::uint64_t seed, const AugmentOptions& options = {});

struct Augmented {
    ImagePair pair;
    std::vector<GroundTruth> gts;
    std::vector<std::string> warnings;  // one per dropped box
};

Augmented apply_augmentation(const ImagePair& pair, std::span<const GroundTruth> gts,
                             const AugmentPlan& plan);

inline Augmented augment(const ImagePair& pair, std::span<const GroundTruth> gts,
                         std::uint64_t seed, const AugmentOptions& options = {}) {
    return apply_augmentation(pair, gts, plan_augmentation(seed, options));
}

/// Mirrors both frames and every box about the vertical center line.
void flip_horizontal(ImagePair& pair, std::span<GroundTruth> gts);

/// Per-sample seed derived from (global seed, image id, epoch).
std::uint64_t sample_seed(std::uint64_t global_seed, const std::string& image_id, std::uint64_t epoch);

}  // namespace gfd
