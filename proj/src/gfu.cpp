#include "gfd/gfu.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "gfd/init.hpp"
#include "gfd/ops.hpp"

namespace gfd {

std::string to_string(GfuVersion v) { return v == GfuVersion::v1 ? "v1" : "v2"; }

GfuVersion parse_gfu_version(const std::string& text) {
    if (text == "v1") return GfuVersion::v1;
    if (text == "v2") return GfuVersion::v2;
    throw std::invalid_argument("unknown GFU version '" + text + "' (expected v1 or v2)");
}

std::vector<Parameter*> GfuParams::parameters() {
    return {&w_color, &b_color, &w_thermal, &b_thermal, &w_joint, &b_joint};
}

GfuParams init_gfu_params(int channels, GfuVersion version, std::uint64_t seed,
                          const std::string& prefix) {
    if (channels < 1) throw std::invalid_argument("GFU channel count must be positive");
    const int c = channels;
    const bool v1 = version == GfuVersion::v1;
    const int gate_in = v1 ? 2 * c : c;
    const int gate_out = v1 ? c : kGfuV2GateWidth * c;
    const int joint_in = v1 ? 2 * c : 2 * kGfuV2GateWidth * c;

    std::mt19937_64 rng(seed);
    GfuParams p;
    p.version = version;
    p.channels = c;
    p.w_color = make_conv_weight(prefix + ".w_color", gate_out, gate_in, 3, rng);
    p.b_color = make_conv_bias(prefix + ".b_color", gate_out);
    p.w_thermal = make_conv_weight(prefix + ".w_thermal", gate_out, gate_in, 3, rng);
    p.b_thermal = make_conv_bias(prefix + ".b_thermal", gate_out);
    p.w_joint = make_conv_weight(prefix + ".w_joint", c, joint_in, 1, rng);
    p.b_joint = make_conv_bias(prefix + ".b_joint", c);
    return p;
}

namespace {

void check_inputs(const Tensor& color, const Tensor& thermal, const GfuParams& p,
                  GfuVersion expected) {
    if (p.version != expected)
        throw std::invalid_argument("GFU " + to_string(expected) + " called with " +
                                    to_string(p.version) + " parameters");
    if (!(color.shape() == thermal.shape()))
        throw ShapeError("GFU inputs differ in shape: " + color.shape().str() + " vs " +
                         thermal.shape().str());
    if (color.shape().c != p.channels)
        throw ShapeError("GFU built for " + std::to_string(p.channels) +
                         " channels received " + color.shape().str());
}

}  // namespace

GfuTrace gfu_v1_trace(const Tensor& color, const Tensor& thermal, const GfuParams& p) {
    check_inputs(color, thermal, p, GfuVersion::v1);
    GfuTrace t;
    t.joined = concat_channels(color, thermal);
    t.gate_color = relu(conv2d(t.joined, p.w_color, p.b_color, 1, 1));
    t.gate_thermal = relu(conv2d(t.joined, p.w_thermal, p.b_thermal, 1, 1));
    t.fused = concat_channels(add(color, t.gate_color), add(thermal, t.gate_thermal));
    t.output = relu(conv2d(t.fused, p.w_joint, p.b_joint, 1, 0));
    return t;
}

GfuTrace gfu_v2_trace(const Tensor& color, const Tensor& thermal, const GfuParams& p) {
    check_inputs(color, thermal, p, GfuVersion::v2);
    GfuTrace t;
    t.joined = concat_channels(color, thermal);
    t.gate_color = relu(conv2d(color, p.w_color, p.b_color, 1, 1));
    t.gate_thermal = relu(conv2d(thermal, p.w_thermal, p.b_thermal, 1, 1));
    t.fused = concat_channels(add(t.joined, t.gate_color), add(t.joined, t.gate_thermal));
    t.output = relu(conv2d(t.fused, p.w_joint, p.b_joint, 1, 0));
    return t;
}

Tensor gfu_v1_forward(const Tensor& color, const Tensor& thermal, const GfuParams& p) {
    return gfu_v1_trace(color, thermal, p).output;
}

Tensor gfu_v2_forward(const Tensor& color, const Tensor& thermal, const GfuParams& p) {
    return gfu_v2_trace(color, thermal, p).output;
}

Tensor gfu_forward(const Tensor& color, const Tensor& thermal, const GfuParams& p) {
    return p.version == GfuVersion::v1 ? gfu_v1_forward(color, thermal, p)
                                       : gfu_v2_forward(color, thermal, p);
}

}  // namespace gfd
