#include "gfd/enhance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gfd {

namespace {

int reflect101(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return i;
}

using Lut = std::array<std::uint8_t, 256>;

Lut tile_mapping(const Image& img, int x0, int y0, int tw, int th, double clip_limit) {
    std::array<long long, 256> hist{};
    for (int y = y0; y < y0 + th; ++y)
        for (int x = x0; x < x0 + tw; ++x)
            ++hist[img.at(reflect101(x, img.width), reflect101(y, img.height))];

    const long long pixels = static_cast<long long>(tw) * th;
    const double scaled = clip_limit * static_cast<double>(pixels) / 256.0;
    if (scaled < static_cast<double>(std::numeric_limits<long long>::max() / 2)) {
        const long long limit = std::max(1LL, static_cast<long long>(scaled));
        long long excess = 0;
        for (auto& h : hist)
            if (h > limit) {
                excess += h - limit;
                h = limit;
            }
        const long long batch = excess / 256;
        const long long residual = excess % 256;
        for (auto& h : hist) h += batch;
        if (residual > 0) {
            const long long step = std::max(256 / residual, 1LL);
            long long left = residual;
            for (int b = 0; b < 256 && left > 0; b += static_cast<int>(step), --left) ++hist[b];
        }
    }

    Lut lut{};
    long long cdf = 0;
    for (int b = 0; b < 256; ++b) {
        cdf += hist[b];
        const double v = 255.0 * static_cast<double>(cdf) / static_cast<double>(pixels);
        lut[b] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    return lut;
}

}  // namespace

Image clahe(const Image& gray, int tiles_x, int tiles_y, double clip_limit) {
    if (gray.channels != 1) throw std::invalid_argument("clahe: expected a grayscale image");
    if (tiles_x < 1 || tiles_y < 1) throw std::invalid_argument("clahe: tile grid must be at least 1x1");
    if (!(clip_limit > 0.0)) throw std::invalid_argument("clahe: clip limit must be positive");
    if (gray.width < tiles_x || gray.height < tiles_y)
        throw std::invalid_argument("clahe: " + std::to_string(gray.width) + "x" +
                                    std::to_string(gray.height) + " image is smaller than the " +
                                    std::to_string(tiles_x) + "x" + std::to_string(tiles_y) +
                                    " tile grid");

    const int tw = (gray.width + tiles_x - 1) / tiles_x;
    const int th = (gray.height + tiles_y - 1) / tiles_y;
    std::vector<Lut> luts(static_cast<std::size_t>(tiles_x) * tiles_y);
    for (int ty = 0; ty < tiles_y; ++ty)
        for (int tx = 0; tx < tiles_x; ++tx)
            luts[ty * tiles_x + tx] = tile_mapping(gray, tx * tw, ty * th, tw, th, clip_limit);

    Image out(gray.width, gray.height, 1);
    for (int y = 0; y < gray.height; ++y) {
        const double fy = (y + 0.5) / th - 0.5;
        const int y0 = static_cast<int>(std::floor(fy));
        const double wy = fy - y0;
        const int ya = std::clamp(y0, 0, tiles_y - 1), yb = std::clamp(y0 + 1, 0, tiles_y - 1);
        for (int x = 0; x < gray.width; ++x) {
            const double fx = (x + 0.5) / tw - 0.5;
            const int x0 = static_cast<int>(std::floor(fx));
            const double wx = fx - x0;
            const int xa = std::clamp(x0, 0, tiles_x - 1), xb = std::clamp(x0 + 1, 0, tiles_x - 1);
            const std::uint8_t v = gray.at(x, y);
            const double top = (1.0 - wx) * luts[ya * tiles_x + xa][v] + wx * luts[ya * tiles_x + xb][v];
            const double bottom = (1.0 - wx) * luts[yb * tiles_x + xa][v] + wx * luts[yb * tiles_x + xb][v];
            out.at(x, y) = static_cast<std::uint8_t>(
                std::clamp(std::lround((1.0 - wy) * top + wy * bottom), 0L, 255L));
        }
    }
    return out;
}

}  // namespace gfd
