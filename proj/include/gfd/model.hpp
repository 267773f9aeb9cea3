#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gfd/detection.hpp"
#include "gfd/gfu.hpp"
#include "gfd/image.hpp"
#include "gfd/topology.hpp"

namespace gfd {

enum class Modality { color, thermal };
std::string to_string(Modality m);
Modality parse_modality(const std::string& text);

/// Everything that determines the network's structure and parameter shapes.
struct ModelConfig {
    FusionVariant variant = FusionVariant::gated;
    GfuVersion gfu_version = GfuVersion::v2;
    Modality single_modality = Modality::color;  // single variant only
    int input_size = 64;
    std::vector<int> level_sizes{8, 4, 2, 1};
    std::vector<int> anchors_per_loc{4, 6, 6, 4};
    int level_channels = 16;
    int stem_channels = 8;
    ScaleRange scales{0.15, 0.9};
    /// 300 or 512 selects the reference SSD grid instead of the toy levels.
    int reference_size = 0;

    Geometry geometry() const;
    /// Canonical one-line description; equal strings mean interchangeable weights.
    std::string describe() const;
    /// 16 hex digits hashing describe().
    std::string fingerprint() const;
};

/// Twin backbones, per-level GFUs and detection heads for one topology.
class Detector {
public:
    Detector(const ModelConfig& config, std::uint64_t seed);

    Detector(const Detector&) = delete;
    Detector& operator=(const Detector&) = delete;
    Detector(Detector&&) = default;
    Detector& operator=(Detector&&) = default;

    /// Maps fed to the heads, ordered as topology().head_maps().
    std::vector<Tensor> forward_pyramid(const Tensor& color, const Tensor& thermal) const;
    /// Raw head outputs, one (N, 6A, H, W) tensor per head map.
    std::vector<Tensor> forward(const Tensor& color, const Tensor& thermal) const;

    std::vector<std::vector<Detection>> detect(const Tensor& color, const Tensor& thermal,
                                               const PredictOptions& options) const;

    std::vector<Parameter*> parameters();
    const ModelConfig& config() const { return config_; }
    const FusionTopology& topology() const { return topology_; }
    const AnchorLayout& layout() const { return layout_; }
    const std::vector<Box>& anchors() const { return anchors_; }

private:
    ModelConfig config_;
    FusionTopology topology_;
    std::optional<ToyBackbone> color_;
    std::optional<ToyBackbone> thermal_;
    std::vector<GfuParams> gfus_;
    DetectionHeads heads_;
    AnchorLayout layout_;
    std::vector<Box> anchors_;
};

/// Stacks images into (N, C, H, W) with values v / 255 - 0.5.
Tensor images_to_tensor(std::span<const Image* const> images);

}  // namespace gfd
