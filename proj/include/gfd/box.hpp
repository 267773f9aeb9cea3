#pragma once

#include <array>

namespace gfd {

/// Axis-aligned box in center form. Normalized to [0,1] unless a caller
/// says otherwise.
struct Box {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    double left() const { return cx - 0.5 * w; }
    double right() const { return cx + 0.5 * w; }
    double top() const { return cy - 0.5 * h; }
    double bottom() const { return cy + 0.5 * h; }
    double area() const { return w * h; }

    static Box from_corners(double x0, double y0, double x1, double y1) {
        return {0.5 * (x0 + x1), 0.5 * (y0 + y1), x1 - x0, y1 - y0};
    }
    bool operator==(const Box&) const = default;
};

double iou(const Box& a, const Box& b);

/// Offset variances of the single-shot box parameterization.
inline constexpr double kCenterVariance = 0.1;
inline constexpr double kSizeVariance = 0.2;

using BoxOffsets = std::array<double, 4>;

/// ((g.cx - a.cx)/a.w/0.1, (g.cy - a.cy)/a.h/0.1, log(g.w/a.w)/0.2, log(g.h/a.h)/0.2)
BoxOffsets encode_box(const Box& anchor, const Box& gt);
Box decode_box(const Box& anchor, const BoxOffsets& offsets);

}  // namespace gfd
