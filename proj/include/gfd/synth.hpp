#pragma once

// Paired color/thermal scenes with pedestrian-shaped rectangles. Each object
// is rendered in the color frame, the thermal frame or both, depending on the
// visibility mode, which lets tests control what each modality can see.

#include <cstdint>
#include <string>
#include <vector>

#include "gfd/annotation.hpp"
#include "gfd/image.hpp"

namespace gfd {

struct VisibilityMode {
    enum class Kind { both, color_only, thermal_only, mixed };
    Kind kind = Kind::both;
    double color_only_probability = 0.5;  // mixed only; the rest are thermal only

    /// "both", "color_only", "thermal_only" or "mixed:<p>".
    static VisibilityMode parse(const std::string& text);
    std::string str() const;
};

struct SynthSpec {
    int width = 64;
    int height = 64;
    int count = 8;
    int min_objects = 1;
    int max_objects = 3;
    VisibilityMode visibility;
    double noise = 8.0;          // per-pixel noise standard deviation, in gray levels
    double min_object_height = 16.0;
    double max_object_height = 32.0;
    double min_aspect = 0.4;     // width / height
    double max_aspect = 0.6;
    double max_overlap = 0.1;    // IoU allowed between objects of one scene
    double night_fraction = 0.5;
    std::uint64_t seed = 0;
};

struct SynthSample {
    ImagePair pair;
    std::vector<GroundTruth> gts;
};

/// Deterministic in spec.seed. Objects that fail to find a free spot after
/// 100 attempts are skipped and reported through `warnings`.
std::vector<SynthSample> synth_dataset(const SynthSpec& spec,
                                       std::vector<std::string>* warnings = nullptr);

}  // namespace gfd
