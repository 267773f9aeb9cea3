#pragma once

// Gated Fusion Units: merge a color and a thermal feature map of shape
// (N, C, H, W) into one joint map of the same shape.
//
//   v1: F_G = F_C ++ F_T
//       A_C = relu(conv3x3(F_G; w_C, b_C))          2C -> C
//       A_T = relu(conv3x3(F_G; w_T, b_T))          2C -> C
//       F_F = (F_C + A_C) ++ (F_T + A_T)            2C
//       F_J = relu(conv1x1(F_F; w_J, b_J))          2C -> C
//
//   v2: F_G = F_C ++ F_T
//       A_C = relu(conv3x3(F_C; w_C, b_C))          C -> 2C
//       A_T = relu(conv3x3(F_T; w_T, b_T))          C -> 2C
//       F_F = (F_G + A_C) ++ (F_G + A_T)            4C
//       F_J = relu(conv1x1(F_F; w_J, b_J))          4C -> C
//
// "++" is channel concatenation, "+" elementwise summation.

#include <cstdint>
#include <string>
#include <vector>

#include "gfd/tensor.hpp"

namespace gfd {

enum class GfuVersion { v1, v2 };

std::string to_string(GfuVersion v);
GfuVersion parse_gfu_version(const std::string& text);

/// Width multiplier of the v2 gate activations relative to C. The v2 sums
/// F_G (2C wide) with A_C, so the gate convolutions emit 2C channels.
inline constexpr int kGfuV2GateWidth = 2;

struct GfuParams {
    GfuVersion version = GfuVersion::v1;
    int channels = 0;
    Parameter w_color, b_color;
    Parameter w_thermal, b_thermal;
    Parameter w_joint, b_joint;

    std::vector<Parameter*> parameters();
};

/// Uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
/// Deterministic in `seed`; parameter names are prefixed with `prefix`.
GfuParams init_gfu_params(int channels, GfuVersion version, std::uint64_t seed,
                          const std::string& prefix = "gfu");

/// Every intermediate of one GFU evaluation.
struct GfuTrace {
    Tensor joined;      // F_G
    Tensor gate_color;  // A_C
    Tensor gate_thermal;  // A_T
    Tensor fused;       // F_F
    Tensor output;      // F_J
};

GfuTrace gfu_v1_trace(const Tensor& color, const Tensor& thermal, const GfuParams& p);
GfuTrace gfu_v2_trace(const Tensor& color, const Tensor& thermal, const GfuParams& p);

Tensor gfu_v1_forward(const Tensor& color, const Tensor& thermal, const GfuParams& p);
Tensor gfu_v2_forward(const Tensor& color, const Tensor& thermal, const GfuParams& p);

/// Dispatches on p.version.
Tensor gfu_forward(const Tensor& color, const Tensor& thermal, const GfuParams& p);

}  // namespace gfd
