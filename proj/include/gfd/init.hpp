#pragma once

#include <random>
#include <string>

#include "gfd/tensor.hpp"

namespace gfd {

/// (out, in, k, k) weight, uniform in +-sqrt(6 / ((in + out) * k * k)).
Parameter make_conv_weight(const std::string& name, int out_channels, int in_channels, int kernel,
                           std::mt19937_64& rng);

/// (1, out, 1, 1) zero bias.
Parameter make_conv_bias(const std::string& name, int out_channels);

}  // namespace gfd
