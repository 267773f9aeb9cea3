#include "gfd/kernels.hpp"

#include <cstddef>

namespace gfd::kernels::reference {

namespace {

std::size_t idx4(int a, int b, int c, int d, int B, int C, int D) {
    return ((static_cast<std::size_t>(a) * B + b) * C + c) * D + d;
}

}  // namespace

void conv2d_forward(const ConvDims& d, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> out) {
    const int oh = d.out_h(), ow = d.out_w(), k = d.kernel;
    for (int n = 0; n < d.batch; ++n)
        for (int oc = 0; oc < d.out_channels; ++oc)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = bias.empty() ? 0.0 : bias[oc];
                    for (int ic = 0; ic < d.in_channels; ++ic)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx) {
                                const int iy = oy * d.stride - d.padding + ky;
                                const int ix = ox * d.stride - d.padding + kx;
                                if (iy < 0 || iy >= d.in_h || ix < 0 || ix >= d.in_w) continue;
                                acc += weight[idx4(oc, ic, ky, kx, d.in_channels, k, k)] *
                                       in[idx4(n, ic, iy, ix, d.in_channels, d.in_h, d.in_w)];
                            }
                    out[idx4(n, oc, oy, ox, d.out_channels, oh, ow)] = acc;
                }
}

void conv2d_backward_input(const ConvDims& d, std::span<const double> grad_out,
                           std::span<const double> weight, std::span<double> grad_in) {
    const int oh = d.out_h(), ow = d.out_w(), k = d.kernel;
    for (int n = 0; n < d.batch; ++n)
        for (int oc = 0; oc < d.out_channels; ++oc)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    const double g = grad_out[idx4(n, oc, oy, ox, d.out_channels, oh, ow)];
                    for (int ic = 0; ic < d.in_channels; ++ic)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx) {
                                const int iy = oy * d.stride - d.padding + ky;
                                const int ix = ox * d.stride - d.padding + kx;
                                if (iy < 0 || iy >= d.in_h || ix < 0 || ix >= d.in_w) continue;
                                grad_in[idx4(n, ic, iy, ix, d.in_channels, d.in_h, d.in_w)] +=
                                    g * weight[idx4(oc, ic, ky, kx, d.in_channels, k, k)];
                            }
                }
}

void conv2d_backward_params(const ConvDims& d, std::span<const double> grad_out,
                            std::span<const double> in, std::span<double> grad_weight,
                            std::span<double> grad_bias) {
    const int oh = d.out_h(), ow = d.out_w(), k = d.kernel;
    for (int n = 0; n < d.batch; ++n)
        for (int oc = 0; oc < d.out_channels; ++oc)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    const double g = grad_out[idx4(n, oc, oy, ox, d.out_channels, oh, ow)];
                    if (!grad_bias.empty()) grad_bias[oc] += g;
                    if (grad_weight.empty()) continue;
                    for (int ic = 0; ic < d.in_channels; ++ic)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx) {
                                const int iy = oy * d.stride - d.padding + ky;
                                const int ix = ox * d.stride - d.padding + kx;
                                if (iy < 0 || iy >= d.in_h || ix < 0 || ix >= d.in_w) continue;
                                grad_weight[idx4(oc, ic, ky, kx, d.in_channels, k, k)] +=
                                    g * in[idx4(n, ic, iy, ix, d.in_channels, d.in_h, d.in_w)];
                            }
                }
}

}  // namespace gfd::kernels::reference
