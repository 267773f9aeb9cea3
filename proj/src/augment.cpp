#include "gfd/augment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gfd {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    const double d = mx - mn;
    v = mx;
    s = mx > 0.0 ? d / mx : 0.0;
    if (d <= 0.0) {
        h = 0.0;
        return;
    }
    if (mx == r)
        h = (g - b) / d;
    else if (mx == g)
        h = 2.0 + (b - r) / d;
    else
        h = 4.0 + (r - g) / d;
    h /= 6.0;
    if (h < 0.0) h += 1.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
    h = h - std::floor(h);
    const double f6 = h * 6.0;
    const int i = static_cast<int>(f6) % 6;
    const double f = f6 - std::floor(f6);
    const double p = v * (1.0 - s), q = v * (1.0 - s * f), t = v * (1.0 - s * (1.0 - f));
    switch (i) {
        case 0: r = v, g = t, b = p; break;
        case 1: r = q, g = v, b = p; break;
        case 2: r = p, g = v, b = t; break;
        case 3: r = p, g = q, b = v; break;
        case 4: r = t, g = p, b = v; break;
        default: r = v, g = p, b = q; break;
    }
}

void photometric(Image& color, const AugmentPlan& plan) {
    const bool hsv = plan.hue || plan.saturation;
    if (!(plan.brightness || plan.contrast || hsv || plan.permute)) return;
    const std::size_t n = static_cast<std::size_t>(color.width) * color.height;
    for (std::size_t i = 0; i < n; ++i) {
        double px[3];
        for (int c = 0; c < 3; ++c) px[c] = color.pixels[3 * i + c];
        if (plan.brightness)
            for (double& v : px) v = std::clamp(v + plan.brightness_shift, 0.0, 255.0);
        if (plan.contrast)
            for (double& v : px) v = std::clamp(v * plan.contrast_factor, 0.0, 255.0);
        if (hsv) {
            double h, s, v;
            rgb_to_hsv(px[0], px[1], px[2], h, s, v);
            if (plan.saturation) s = std::clamp(s * plan.saturation_factor, 0.0, 1.0);
            if (plan.hue) h += plan.hue_shift;
            hsv_to_rgb(h, s, v, px[0], px[1], px[2]);
        }
        for (int c = 0; c < 3; ++c) {
            const int src = plan.permute ? plan.channel_order[c] : c;
            color.pixels[3 * i + c] = to_byte(px[src]);
        }
    }
}

Image letterbox(const Image& img, int new_w, int new_h, int off_x, int off_y) {
    Image out(img.width, img.height, img.channels);
    std::vector<double> mean(img.channels, 0.0);
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < img.channels; ++c) mean[c] += img.pixels[i * img.channels + c];
    for (double& m : mean) m /= static_cast<double>(n);

    const double sx = static_cast<double>(img.width) / new_w;
    const double sy = static_cast<double>(img.height) / new_h;
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            const int lx = x - off_x, ly = y - off_y;
            if (lx < 0 || ly < 0 || lx >= new_w || ly >= new_h) {
                for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = to_byte(mean[c]);
                continue;
            }
            const double u = std::clamp((lx + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
            const double v = std::clamp((ly + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
            const int x0 = static_cast<int>(u), y0 = static_cast<int>(v);
            const int x1 = std::min(x0 + 1, img.width - 1), y1 = std::min(y0 + 1, img.height - 1);
            const double fx = u - x0, fy = v - y0;
            for (int c = 0; c < img.channels; ++c) {
                const double top = (1 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
                const double bot = (1 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
                out.at(x, y, c) = to_byte((1 - fy) * top + fy * bot);
            }
        }
    return out;
}

void flip_image(Image& img) {
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width / 2; ++x)
            for (int c = 0; c < img.channels; ++c)
                std::swap(img.at(x, y, c), img.at(img.width - 1 - x, y, c));
}

}  // namespace

std::uint64_t sample_seed(std::uint64_t global_seed, const std::string& image_id, std::uint64_t epoch) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : image_id) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(global_seed) ^ h ^ splitmix64(epoch + 0x632be59bd9b4e019ULL));
}

AugmentPlan plan_augmentation(std::uint64_t seed, const AugmentOptions& o) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto coin = [&] { return unit(rng) < o.probability; };
    auto range = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    AugmentPlan p;
    p.brightness = coin();
    p.brightness_shift = range(-o.brightness_delta, o.brightness_delta);
    p.contrast = coin();
    p.contrast_factor = range(o.contrast_min, o.contrast_max);
    p.hue = coin();
    p.hue_shift = range(-o.hue_delta, o.hue_delta);
    p.saturation = coin();
    p.saturation_factor = range(o.saturation_min, o.saturation_max);
    p.permute = coin();
    std::shuffle(p.channel_order.begin(), p.channel_order.end(), rng);
    p.flip = coin();
    p.resize = coin();
    p.resize_scale = range(o.scale_min, o.scale_max);
    return p;
}

void flip_horizontal(ImagePair& pair, std::span<GroundTruth> gts) {
    flip_image(pair.color);
    flip_image(pair.thermal);
    for (auto& g : gts) g.rect.x = pair.width() - g.rect.x - g.rect.w;
}

Augmented apply_augmentation(const ImagePair& pair, std::span<const GroundTruth> gts,
                             const AugmentPlan& plan) {
    Augmented out{pair, std::vector<GroundTruth>(gts.begin(), gts.end()), {}};
    photometric(out.pair.color, plan);
    if (plan.flip) flip_horizontal(out.pair, out.gts);
    if (plan.resize) {
        const int w = pair.width(), h = pair.height();
        const int new_w = std::max(1, static_cast<int>(std::lround(w * plan.resize_scale)));
        const int new_h = std::max(1, static_cast<int>(std::lround(h * plan.resize_scale)));
        // Floor division so that negative offsets crop symmetrically.
        const int off_x = static_cast<int>(std::floor((w - new_w) / 2.0));
        const int off_y = static_cast<int>(std::floor((h - new_h) / 2.0));
        out.pair.color = letterbox(out.pair.color, new_w, new_h, off_x, off_y);
        out.pair.thermal = letterbox(out.pair.thermal, new_w, new_h, off_x, off_y);
        const double kx = static_cast<double>(new_w) / w, ky = static_cast<double>(new_h) / h;
        std::vector<GroundTruth> kept;
        for (auto g : out.gts) {
            g.rect = {g.rect.x * kx + off_x, g.rect.y * ky + off_y, g.rect.w * kx, g.rect.h * ky};
            if (clamp_to_image(g.rect, w, h) && g.rect.w >= 1.0 && g.rect.h >= 1.0)
                kept.push_back(g);
            else
                out.warnings.push_back("augment: dropped a box pushed outside " + pair.id);
        }
        out.gts = std::move(kept);
    }
    return out;
}

}  // namespace gfd
