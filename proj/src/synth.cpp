#include "gfd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace gfd {

VisibilityMode VisibilityMode::parse(const std::string& text) {
    VisibilityMode m;
    if (text == "both") {
        m.kind = Kind::both;
    } else if (text == "color_only") {
        m.kind = Kind::color_only;
    } else if (text == "thermal_only") {
        m.kind = Kind::thermal_only;
    } else if (text.rfind("mixed:", 0) == 0) {
        m.kind = Kind::mixed;
        std::size_t used = 0;
        const std::string tail = text.substr(6);
        try {
            m.color_only_probability = std::stod(tail, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tail.size() || tail.empty() || !(m.color_only_probability >= 0.0) ||
            m.color_only_probability > 1.0)
            throw std::invalid_argument("bad mixed visibility '" + text + "' (want mixed:<p>, 0<=p<=1)");
    } else {
        throw std::invalid_argument("unknown visibility mode '" + text +
                                    "' (expected both, color_only, thermal_only or mixed:<p>)");
    }
    return m;
}

std::string VisibilityMode::str() const {
    switch (kind) {
        case Kind::both: return "both";
        case Kind::color_only: return "color_only";
        case Kind::thermal_only: return "thermal_only";
        case Kind::mixed: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "mixed:%g", color_only_probability);
            return buf;
        }
    }
    return "both";
}

namespace {

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Bilinearly upsampled coarse random grid, values in [-1, 1].
std::vector<double> smooth_field(int w, int h, int grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> coarse(static_cast<std::size_t>(grid + 1) * (grid + 1));
    for (double& v : coarse) v = u(rng);
    std::vector<double> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double gx = static_cast<double>(x) / w * grid, gy = static_cast<double>(y) / h * grid;
            const int x0 = static_cast<int>(gx), y0 = static_cast<int>(gy);
            const double fx = gx - x0, fy = gy - y0;
            auto at = [&](int i, int j) { return coarse[static_cast<std::size_t>(j) * (grid + 1) + i]; };
            out[static_cast<std::size_t>(y) * w + x] =
                (1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x0 + 1, y0)) +
                fy * ((1 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1));
        }
    return out;
}

Visibility draw_visibility(const VisibilityMode& mode, std::mt19937_64& rng) {
    switch (mode.kind) {
        case VisibilityMode::Kind::both: return Visibility::both;
        case VisibilityMode::Kind::color_only: return Visibility::color_only;
        case VisibilityMode::Kind::thermal_only: return Visibility::thermal_only;
        case VisibilityMode::Kind::mixed: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            return u(rng) < mode.color_only_probability ? Visibility::color_only
                                                        : Visibility::thermal_only;
        }
    }
    return Visibility::both;
}

double rect_iou(const PixelRect& a, const PixelRect& b) {
    const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    if (iw <= 0 || ih <= 0) return 0.0;
    return iw * ih / (a.w * a.h + b.w * b.h - iw * ih);
}

}  // namespace

std::vector<SynthSample> synth_dataset(const SynthSpec& spec, std::vector<std::string>* warnings) {
    if (spec.width < 8 || spec.height < 8) throw std::invalid_argument("synth: image too small");
    if (spec.count < 0 || spec.min_objects < 0 || spec.max_objects < spec.min_objects)
        throw std::invalid_argument("synth: bad object count range");
    if (!(spec.min_object_height > 0 && spec.max_object_height >= spec.min_object_height &&
          spec.max_object_height <= spec.height))
        throw std::invalid_argument("synth: bad object height range");

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> count_dist(spec.min_objects, spec.max_objects);

    std::vector<SynthSample> out;
    out.reserve(spec.count);
    for (int i = 0; i < spec.count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "s%05d", i);
        SynthSample s;
        s.pair.id = id;
        s.pair.time_tag = unit(rng) < spec.night_fraction ? TimeTag::night : TimeTag::day;
        const int w = spec.width, h = spec.height;

        // Backgrounds: smooth clutter plus pixel noise.
        std::vector<double> color(static_cast<std::size_t>(w) * h * 3), thermal(static_cast<std::size_t>(w) * h);
        for (int c = 0; c < 3; ++c) {
            const auto field = smooth_field(w, h, 4, rng);
            const double base = 95.0 + 30.0 * unit(rng);
            for (std::size_t p = 0; p < field.size(); ++p) color[p * 3 + c] = base + 25.0 * field[p];
        }
        {
            const auto field = smooth_field(w, h, 4, rng);
            for (std::size_t p = 0; p < field.size(); ++p) thermal[p] = 60.0 + 20.0 * field[p];
        }

        // Objects.
        const int wanted = count_dist(rng);
        std::vector<PixelRect> placed;
        for (int k = 0; k < wanted; ++k) {
            bool ok = false;
            PixelRect r;
            for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
                const double oh = std::round(spec.min_object_height +
                                             (spec.max_object_height - spec.min_object_height) * unit(rng));
                const double aspect = spec.min_aspect + (spec.max_aspect - spec.min_aspect) * unit(rng);
                const double ow = std::max(2.0, std::round(oh * aspect));
                r = {std::floor(unit(rng) * (w - ow + 1)), std::floor(unit(rng) * (h - oh + 1)), ow, oh};
                ok = std::all_of(placed.begin(), placed.end(),
                                 [&](const PixelRect& p) { return rect_iou(p, r) <= spec.max_overlap; });
            }
            if (!ok) {
                if (warnings)
                    warnings->push_back("synth: " + s.pair.id + " placed " + std::to_string(k) +
                                        " of " + std::to_string(wanted) + " objects");
                break;
            }
            placed.push_back(r);

            GroundTruth gt;
            gt.rect = r;
            gt.raw_class = RawClass::person;
            gt.visibility = draw_visibility(spec.visibility, rng);

            // Color appearance: a saturated hue with horizontal stripes.
            const double hue = unit(rng);
            double rgb[3];
            {
                const double hh = hue * 6.0;
                const int sector = static_cast<int>(hh) % 6;
                const double f = hh - std::floor(hh);
                const double v = 210.0, lo = 40.0;
                const double up = lo + (v - lo) * f, down = v - (v - lo) * f;
                const double table[6][3] = {{v, up, lo}, {down, v, lo}, {lo, v, up},
                                            {lo, down, v}, {up, lo, v}, {v, lo, down}};
                for (int c = 0; c < 3; ++c) rgb[c] = table[sector][c];
            }
            const double heat = 185.0 + 30.0 * unit(rng);
            const bool in_color = gt.visibility != Visibility::thermal_only;
            const bool in_thermal = gt.visibility != Visibility::color_only;
            for (int y = static_cast<int>(r.y); y < static_cast<int>(r.y + r.h); ++y)
                for (int x = static_cast<int>(r.x); x < static_cast<int>(r.x + r.w); ++x) {
                    const std::size_t p = static_cast<std::size_t>(y) * w + x;
                    if (in_color) {
                        const double stripe = ((y - static_cast<int>(r.y)) / 3) % 2 == 0 ? 1.0 : 0.7;
                        for (int c = 0; c < 3; ++c) color[p * 3 + c] = rgb[c] * stripe;
                    }
                    if (in_thermal) {
                        // Warmer toward the top, like a head and torso.
                        const double t = (y - r.y) / r.h;
                        thermal[p] = heat - 25.0 * t;
                    }
                }
            s.gts.push_back(gt);
        }

        const double dim = s.pair.time_tag == TimeTag::night ? 0.6 : 1.0;
        s.pair.color = Image(w, h, 3);
        s.pair.thermal = Image(w, h, 1);
        for (std::size_t p = 0; p < color.size(); ++p)
            s.pair.color.pixels[p] = to_byte(dim * color[p] + spec.noise * gauss(rng));
        for (std::size_t p = 0; p < thermal.size(); ++p)
            s.pair.thermal.pixels[p] = to_byte(thermal[p] + spec.noise * gauss(rng));
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace gfd
