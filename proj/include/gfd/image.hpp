#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfd {

/// Interleaved 8-bit image, row-major, `channels` bytes per pixel.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, int c, std::uint8_t fill = 0)
        : width(w), height(h), channels(c),
          pixels(static_cast<std::size_t>(w) * h * c, fill) {}

    std::uint8_t& at(int x, int y, int c = 0) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    bool operator==(const Image&) const = default;
};

class ImageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binary P5 (1 channel) or P6 (3 channels) with maxval 255.
Image decode_pnm(const std::string& bytes);
std::string encode_pnm(const Image& img);
Image read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const Image& img);

enum class TimeTag { day, night, unknown };
std::string to_string(TimeTag t);
TimeTag parse_time_tag(const std::string& text);

/// Aligned color (3-channel) and thermal (1-channel) frames of equal size.
struct ImagePair {
    Image color;
    Image thermal;
    std::string id;
    TimeTag time_tag = TimeTag::unknown;

    int width() const { return color.width; }
    int height() const { return color.height; }
};

/// Throws ImageError on format problems or when the two frames differ in size.
ImagePair load_image_pair(const std::filesystem::path& color_path,
                          const std::filesystem::path& thermal_path);

}  // namespace gfd
