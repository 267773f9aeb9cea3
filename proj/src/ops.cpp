#include "gfd/ops.hpp"

#include <cmath>
#include <string>

#include "gfd/kernels.hpp"

namespace gfd {

namespace {

detail::Node& parent(detail::Node& self, std::size_t i) { return *self.parents[i]; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!(a.shape() == b.shape()))
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                         b.shape().str());
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride,
              int padding) {
    const Shape& is = input.shape();
    const Shape& ks = kernel.shape();
    if (stride < 1) throw ShapeError("conv2d: stride must be positive");
    if (padding < 0) throw ShapeError("conv2d: padding must be non-negative");
    if (ks.h != ks.w) throw ShapeError("conv2d: kernel must be square, got " + ks.str());
    if (ks.c != is.c)
        throw ShapeError("conv2d: input " + is.str() + " has " + std::to_string(is.c) +
                         " channels but kernel " + ks.str() + " expects " + std::to_string(ks.c));
    if (static_cast<int>(bias.numel()) != ks.n)
        throw ShapeError("conv2d: bias has " + std::to_string(bias.numel()) +
                         " values for " + std::to_string(ks.n) + " output channels");

    kernels::ConvDims d;
    d.batch = is.n;
    d.in_channels = is.c;
    d.in_h = is.h;
    d.in_w = is.w;
    d.out_channels = ks.n;
    d.kernel = ks.h;
    d.stride = stride;
    d.padding = padding;
    if (is.h + 2 * padding < ks.h || is.w + 2 * padding < ks.w)
        throw ShapeError("conv2d: kernel " + ks.str() + " larger than padded input " + is.str());

    const Shape out_shape{is.n, ks.n, d.out_h(), d.out_w()};
    std::vector<double> out(out_shape.numel());
    kernels::conv2d_forward(d, input.values(), kernel.values(), bias.values(), out);

    return Tensor::make_result(out_shape, std::move(out), {input, kernel, bias},
                               [d](detail::Node& self) {
                                   auto& x = parent(self, 0);
                                   auto& w = parent(self, 1);
                                   auto& b = parent(self, 2);
                                   if (x.requires_grad)
                                       kernels::conv2d_backward_input(d, self.grad, w.value,
                                                                      x.ensure_grad());
                                   std::span<double> gw, gb;
                                   if (w.requires_grad) gw = w.ensure_grad();
                                   if (b.requires_grad) gb = b.ensure_grad();
                                   if (!gw.empty() || !gb.empty())
                                       kernels::conv2d_backward_params(d, self.grad, x.value, gw, gb);
                               });
}

Tensor relu(const Tensor& x) {
    auto in = x.values();
    std::vector<double> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
    return Tensor::make_result(x.shape(), std::move(out), {x}, [](detail::Node& self) {
        auto& p = parent(self, 0);
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i)
            if (p.value[i] > 0.0) g[i] += self.grad[i];
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    auto av = a.values(), bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
    return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
        for (std::size_t k = 0; k < 2; ++k) {
            auto& p = parent(self, k);
            if (!p.requires_grad) continue;
            auto& g = p.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
    });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w)
        throw ShapeError("concat_channels: batch/spatial mismatch " + sa.str() + " vs " + sb.str());
    const Shape out_shape{sa.n, sa.c + sb.c, sa.h, sa.w};
    const std::size_t plane = static_cast<std::size_t>(sa.h) * sa.w;
    const std::size_t a_block = sa.c * plane, b_block = sb.c * plane;
    std::vector<double> out(out_shape.numel());
    auto av = a.values(), bv = b.values();
    for (int n = 0; n < sa.n; ++n) {
        std::copy_n(av.begin() + n * a_block, a_block, out.begin() + n * (a_block + b_block));
        std::copy_n(bv.begin() + n * b_block, b_block,
                    out.begin() + n * (a_block + b_block) + a_block);
    }
    return Tensor::make_result(out_shape, std::move(out), {a, b},
                               [a_block, b_block, batch = sa.n](detail::Node& self) {
                                   auto& pa = parent(self, 0);
                                   auto& pb = parent(self, 1);
                                   for (int n = 0; n < batch; ++n) {
                                       const std::size_t base = n * (a_block + b_block);
                                       if (pa.requires_grad) {
                                           auto& g = pa.ensure_grad();
                                           for (std::size_t i = 0; i < a_block; ++i)
                                               g[n * a_block + i] += self.grad[base + i];
                                       }
                                       if (pb.requires_grad) {
                                           auto& g = pb.ensure_grad();
                                           for (std::size_t i = 0; i < b_block; ++i)
                                               g[n * b_block + i] += self.grad[base + a_block + i];
                                       }
                                   }
                               });
}

Tensor slice_channels(const Tensor& x, int begin, int count) {
    const Shape& s = x.shape();
    if (begin < 0 || count < 0 || begin + count > s.c)
        throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + s.str());
    const Shape out_shape{s.n, count, s.h, s.w};
    const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
    std::vector<double> out(out_shape.numel());
    auto xv = x.values();
    for (int n = 0; n < s.n; ++n)
        std::copy_n(xv.begin() + (static_cast<std::size_t>(n) * s.c + begin) * plane, count * plane,
                    out.begin() + static_cast<std::size_t>(n) * count * plane);
    return Tensor::make_result(out_shape, std::move(out), {x},
                               [s, begin, count, plane](detail::Node& self) {
                                   auto& g = parent(self, 0).ensure_grad();
                                   for (int n = 0; n < s.n; ++n)
                                       for (std::size_t i = 0; i < count * plane; ++i)
                                           g[(static_cast<std::size_t>(n) * s.c + begin) * plane + i] +=
                                               self.grad[static_cast<std::size_t>(n) * count * plane + i];
                               });
}

Tensor sum(const Tensor& x) {
    double acc = 0.0;
    for (double v : x.values()) acc += v;
    return Tensor::make_result({1, 1, 1, 1}, {acc}, {x}, [](detail::Node& self) {
        auto& g = parent(self, 0).ensure_grad();
        for (double& v : g) v += self.grad[0];
    });
}

Tensor scale(const Tensor& x, double factor) {
    auto xv = x.values();
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = factor * xv[i];
    return Tensor::make_result(x.shape(), std::move(out), {x}, [factor](detail::Node& self) {
        auto& g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
    });
}

Tensor gather(std::span<const Tensor> sources, std::span<const GatherIndex> indices) {
    std::vector<double> out(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto& ix = indices[i];
        if (ix.source >= sources.size() || ix.offset >= sources[ix.source].numel())
            throw ShapeError("gather: index " + std::to_string(i) + " out of range");
        out[i] = sources[ix.source].values()[ix.offset];
    }
    std::vector<GatherIndex> idx(indices.begin(), indices.end());
    const Shape out_shape{1, static_cast<int>(indices.size()), 1, 1};
    return Tensor::make_result(out_shape, std::move(out),
                               std::vector<Tensor>(sources.begin(), sources.end()),
                               [idx = std::move(idx)](detail::Node& self) {
                                   for (auto& p : self.parents)
                                       if (p->requires_grad) p->ensure_grad();
                                   for (std::size_t i = 0; i < idx.size(); ++i) {
                                       auto& p = *self.parents[idx[i].source];
                                       if (p.requires_grad) p.grad[idx[i].offset] += self.grad[i];
                                   }
                               });
}

double softmax_cross_entropy_value(double background_logit, double foreground_logit, int label) {
    const double m = std::max(background_logit, foreground_logit);
    const double lse =
        m + std::log(std::exp(background_logit - m) + std::exp(foreground_logit - m));
    return lse - (label == 1 ? foreground_logit : background_logit);
}

double foreground_probability(double background_logit, double foreground_logit) {
    return 1.0 / (1.0 + std::exp(background_logit - foreground_logit));
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
    if (logits.numel() != 2 * labels.size())
        throw ShapeError("softmax_cross_entropy: " + std::to_string(logits.numel()) +
                         " logits for " + std::to_string(labels.size()) + " labels");
    auto lv = logits.values();
    std::vector<double> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        out[i] = softmax_cross_entropy_value(lv[2 * i], lv[2 * i + 1], labels[i]);
    std::vector<int> lab(labels.begin(), labels.end());
    const Shape out_shape{1, static_cast<int>(labels.size()), 1, 1};
    return Tensor::make_result(out_shape, std::move(out), {logits},
                               [lab = std::move(lab)](detail::Node& self) {
                                   auto& p = parent(self, 0);
                                   auto& g = p.ensure_grad();
                                   for (std::size_t i = 0; i < lab.size(); ++i) {
                                       const double pf = foreground_probability(p.value[2 * i],
                                                                                p.value[2 * i + 1]);
                                       const double pb = 1.0 - pf;
                                       g[2 * i] += self.grad[i] * (pb - (lab[i] == 0 ? 1.0 : 0.0));
                                       g[2 * i + 1] += self.grad[i] * (pf - (lab[i] == 1 ? 1.0 : 0.0));
                                   }
                               });
}

Tensor smooth_l1(const Tensor& pred, std::span<const double> target) {
    if (pred.numel() != target.size())
        throw ShapeError("smooth_l1: " + std::to_string(pred.numel()) + " predictions for " +
                         std::to_string(target.size()) + " targets");
    auto pv = pred.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        const double r = pv[i] - target[i];
        acc += std::abs(r) < 1.0 ? 0.5 * r * r : std::abs(r) - 0.5;
    }
    std::vector<double> tgt(target.begin(), target.end());
    return Tensor::make_result({1, 1, 1, 1}, {acc}, {pred},
                               [tgt = std::move(tgt)](detail::Node& self) {
                                   auto& p = parent(self, 0);
                                   auto& g = p.ensure_grad();
                                   for (std::size_t i = 0; i < tgt.size(); ++i) {
                                       const double r = p.value[i] - tgt[i];
                                       const double d = std::abs(r) < 1.0 ? r : (r > 0 ? 1.0 : -1.0);
                                       g[i] += self.grad[0] * d;
                                   }
                               });
}

Tensor half_sum_squares(const Tensor& x) {
    double acc = 0.0;
    for (double v : x.values()) acc += v * v;
    return Tensor::make_result({1, 1, 1, 1}, {0.5 * acc}, {x}, [](detail::Node& self) {
        auto& p = parent(self, 0);
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * p.value[i];
    });
}

}  // namespace gfd
