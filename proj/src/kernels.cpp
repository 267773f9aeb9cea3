#include "gfd/kernels.hpp"

#include <algorithm>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gfd::kernels {

namespace {

// Output positions o in [lo, hi] whose input tap o*stride - padding + offset
// falls inside [0, extent).
struct ValidRange {
    int lo;
    int hi;
};

ValidRange valid_range(int out_extent, int in_extent, int stride, int padding, int offset) {
    const int shift = padding - offset;
    const int lo = shift <= 0 ? 0 : (shift + stride - 1) / stride;
    const int top = in_extent - 1 + shift;
    const int hi = top < 0 ? -1 : std::min(out_extent - 1, top / stride);
    return {lo, hi};
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void conv2d_forward(const ConvDims& d, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> out) {
    const int oh = d.out_h(), ow = d.out_w(), k = d.kernel, s = d.stride;
    const std::size_t in_plane = static_cast<std::size_t>(d.in_h) * d.in_w;
    const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
    const int jobs = d.batch * d.out_channels;

#pragma omp parallel for schedule(static)
    for (int job = 0; job < jobs; ++job) {
        const int n = job / d.out_channels;
        const int oc = job % d.out_channels;
        double* dst = out.data() + static_cast<std::size_t>(job) * out_plane;
        std::fill(dst, dst + out_plane, bias.empty() ? 0.0 : bias[oc]);
        for (int ic = 0; ic < d.in_channels; ++ic) {
            const double* src =
                in.data() + (static_cast<std::size_t>(n) * d.in_channels + ic) * in_plane;
            const double* wk =
                weight.data() + (static_cast<std::size_t>(oc) * d.in_channels + ic) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                const ValidRange ry = valid_range(oh, d.in_h, s, d.padding, ky);
                for (int kx = 0; kx < k; ++kx) {
                    const double wv = wk[ky * k + kx];
                    const ValidRange rx = valid_range(ow, d.in_w, s, d.padding, kx);
                    for (int oy = ry.lo; oy <= ry.hi; ++oy) {
                        const double* row = src + static_cast<std::size_t>(oy * s - d.padding + ky) * d.in_w;
                        double* orow = dst + static_cast<std::size_t>(oy) * ow;
                        for (int ox = rx.lo; ox <= rx.hi; ++ox)
                            orow[ox] += wv * row[ox * s - d.padding + kx];
                    }
                }
            }
        }
    }
}

void conv2d_backward_input(const ConvDims& d, std::span<const double> grad_out,
                           std::span<const double> weight, std::span<double> grad_in) {
    const int oh = d.out_h(), ow = d.out_w(), k = d.kernel, s = d.stride;
    const std::size_t in_plane = static_cast<std::size_t>(d.in_h) * d.in_w;
    const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
    const int jobs = d.batch * d.in_channels;

    // Scatter in (oc, oy, ox, ky, kx) order, as the reference does.
#pragma omp parallel for schedule(static)
    for (int job = 0; job < jobs; ++job) {
        const int n = job / d.in_channels;
        const int ic = job % d.in_channels;
        double* dst = grad_in.data() + static_cast<std::size_t>(job) * in_plane;
        for (int oc = 0; oc < d.out_channels; ++oc) {
            const double* go =
                grad_out.data() + (static_cast<std::size_t>(n) * d.out_channels + oc) * out_plane;
            const double* wk =
                weight.data() + (static_cast<std::size_t>(oc) * d.in_channels + ic) * k * k;
            for (int oy = 0; oy < oh; ++oy) {
                const int ky_lo = std::max(0, d.padding - oy * s);
                const int ky_hi = std::min(k, d.in_h + d.padding - oy * s);
                for (int ox = 0; ox < ow; ++ox) {
                    const double g = go[static_cast<std::size_t>(oy) * ow + ox];
                    const int kx_lo = std::max(0, d.padding - ox * s);
                    const int kx_hi = std::min(k, d.in_w + d.padding - ox * s);
                    for (int ky = ky_lo; ky < ky_hi; ++ky) {
                        double* row = dst + static_cast<std::size_t>(oy * s - d.padding + ky) * d.in_w +
                                      (ox * s - d.padding);
                        const double* wrow = wk + ky * k;
                        for (int kx = kx_lo; kx < kx_hi; ++kx) row[kx] += g * wrow[kx];
                    }
                }
            }
        }
    }
}

void conv2d_backward_params(const ConvDims& d, std::span<const double> grad_out,
                            std::span<const double> in, std::span<double> grad_weight,
                            std::span<double> grad_bias) {
    const int oh = d.out_h(), ow = d.out_w(), k = d.kernel, s = d.stride;
    const std::size_t in_plane = static_cast<std::size_t>(d.in_h) * d.in_w;
    const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;

    // Each weight and bias element accumulates over (n, oy, ox) in order.
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < d.out_channels; ++oc) {
        if (!grad_bias.empty()) {
            double acc = grad_bias[oc];
            for (int n = 0; n < d.batch; ++n) {
                const double* go =
                    grad_out.data() + (static_cast<std::size_t>(n) * d.out_channels + oc) * out_plane;
                for (std::size_t i = 0; i < out_plane; ++i) acc += go[i];
            }
            grad_bias[oc] = acc;
        }
        if (grad_weight.empty()) continue;
        for (int ic = 0; ic < d.in_channels; ++ic) {
            double* gw = grad_weight.data() + (static_cast<std::size_t>(oc) * d.in_channels + ic) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                const ValidRange ry = valid_range(oh, d.in_h, s, d.padding, ky);
                for (int kx = 0; kx < k; ++kx) {
                    const ValidRange rx = valid_range(ow, d.in_w, s, d.padding, kx);
                    double acc = gw[ky * k + kx];
                    for (int n = 0; n < d.batch; ++n) {
                        const double* go =
                            grad_out.data() + (static_cast<std::size_t>(n) * d.out_channels + oc) * out_plane;
                        const double* src =
                            in.data() + (static_cast<std::size_t>(n) * d.in_channels + ic) * in_plane;
                        for (int oy = ry.lo; oy <= ry.hi; ++oy) {
                            const double* row = src + static_cast<std::size_t>(oy * s - d.padding + ky) * d.in_w;
                            const double* grow = go + static_cast<std::size_t>(oy) * ow;
                            for (int ox = rx.lo; ox <= rx.hi; ++ox)
                                acc += grow[ox] * row[ox * s - d.padding + kx];
                        }
                    }
                    gw[ky * k + kx] = acc;
                }
            }
        }
    }
}

}  // namespace gfd::kernels
