#include "gfd/init.hpp"

#include <cmath>

namespace gfd {

Parameter make_conv_weight(const std::string& name, int out_channels, int in_channels, int kernel,
                           std::mt19937_64& rng) {
    const double fan = static_cast<double>(in_channels + out_channels) * kernel * kernel;
    const double bound = std::sqrt(6.0 / fan);
    std::uniform_real_distribution<double> dist(-bound, bound);
    const Shape shape{out_channels, in_channels, kernel, kernel};
    std::vector<double> w(shape.numel());
    for (double& v : w) v = dist(rng);
    return {name, Tensor::from_values(shape, std::move(w), true), ParamKind::Weight};
}

Parameter make_conv_bias(const std::string& name, int out_channels) {
    return {name, Tensor::zeros({1, out_channels, 1, 1}, true), ParamKind::Bias};
}

}  // namespace gfd
