#pragma once

// Raw 2-D convolution kernels over NCHW double buffers.
//
// gfd::kernels holds the OpenMP-parallel versions used by the autodiff ops.
// gfd::kernels::reference holds plain serial loops kept as the test oracle
// and benchmark baseline. Every parallel kernel partitions work so that each
// output element is written by exactly one thread in a fixed summation order,
// which keeps results independent of the thread count.

#include <span>

namespace gfd::kernels {

struct ConvDims {
    int batch = 1;
    int in_channels = 1;
    int in_h = 1;
    int in_w = 1;
    int out_channels = 1;
    int kernel = 1;
    int stride = 1;
    int padding = 0;

    int out_h() const { return (in_h + 2 * padding - kernel) / stride + 1; }
    int out_w() const { return (in_w + 2 * padding - kernel) / stride + 1; }
};

/// out = conv(in, weight) + bias. `out` is overwritten.
void conv2d_forward(const ConvDims& d, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> out);

/// grad_in += conv^T(grad_out, weight)
void conv2d_backward_input(const ConvDims& d, std::span<const double> grad_out,
                           std::span<const double> weight, std::span<double> grad_in);

/// grad_weight += correlation of grad_out with in; grad_bias += spatial sums.
/// Either output span may be empty to skip it.
void conv2d_backward_params(const ConvDims& d, std::span<const double> grad_out,
                            std::span<const double> in, std::span<double> grad_weight,
                            std::span<double> grad_bias);

/// Number of threads the parallel kernels will use (1 without OpenMP).
int max_threads();

namespace reference {

void conv2d_forward(const ConvDims& d, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> out);
void conv2d_backward_input(const ConvDims& d, std::span<const double> grad_out,
                           std::span<const double> weight, std::span<double> grad_in);
void conv2d_backward_params(const ConvDims& d, std::span<const double> grad_out,
                            std::span<const double> in, std::span<double> grad_weight,
                            std::span<double> grad_bias);

}  // namespace reference

}  // namespace gfd::kernels
