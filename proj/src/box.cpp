#include "gfd/box.hpp"

#include <algorithm>
#include <cmath>

namespace gfd {

double iou(const Box& a, const Box& b) {
    const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

BoxOffsets encode_box(const Box& anchor, const Box& gt) {
    return {(gt.cx - anchor.cx) / anchor.w / kCenterVariance,
            (gt.cy - anchor.cy) / anchor.h / kCenterVariance,
            std::log(gt.w / anchor.w) / kSizeVariance,
            std::log(gt.h / anchor.h) / kSizeVariance};
}

Box decode_box(const Box& anchor, const BoxOffsets& t) {
    return {anchor.cx + t[0] * kCenterVariance * anchor.w,
            anchor.cy + t[1] * kCenterVariance * anchor.h,
            anchor.w * std::exp(t[2] * kSizeVariance),
            anchor.h * std::exp(t[3] * kSizeVariance)};
}

}  // namespace gfd
