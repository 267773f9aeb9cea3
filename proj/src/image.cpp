#include "gfd/image.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace gfd {

namespace {

// Reads the next whitespace-separated header token, skipping '#' comments.
std::string header_token(const std::string& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
            ++pos;
        } else {
            break;
        }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw ImageError("truncated PNM header");
    return bytes.substr(start, pos - start);
}

int header_int(const std::string& bytes, std::size_t& pos, const char* what) {
    const std::string tok = header_token(bytes, pos);
    for (char ch : tok)
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw ImageError(std::string("bad PNM ") + what + " '" + tok + "'");
    return std::stoi(tok);
}

}  // namespace

Image decode_pnm(const std::string& bytes) {
    std::size_t pos = 0;
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw ImageError("bad magic number (expected P5 or P6)");
    pos = 2;
    const int channels = bytes[1] == '6' ? 3 : 1;
    const int w = header_int(bytes, pos, "width");
    const int h = header_int(bytes, pos, "height");
    const int maxval = header_int(bytes, pos, "maxval");
    if (w <= 0 || h <= 0) throw ImageError("PNM image has a zero extent");
    if (maxval != 255) throw ImageError("unsupported PNM maxval " + std::to_string(maxval));
    if (pos >= bytes.size()) throw ImageError("truncated PNM payload");
    ++pos;  // the single whitespace byte ending the header
    Image img(w, h, channels);
    if (bytes.size() - pos < img.pixels.size())
        throw ImageError("truncated PNM payload: expected " + std::to_string(img.pixels.size()) +
                         " bytes, found " + std::to_string(bytes.size() - pos));
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), img.pixels.size(), img.pixels.begin());
    return img;
}

std::string encode_pnm(const Image& img) {
    if (img.channels != 1 && img.channels != 3)
        throw ImageError("PNM supports 1 or 3 channels, got " + std::to_string(img.channels));
    std::string out = (img.channels == 3 ? "P6\n" : "P5\n") + std::to_string(img.width) + " " +
                      std::to_string(img.height) + "\n255\n";
    out.append(img.pixels.begin(), img.pixels.end());
    return out;
}

Image read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return decode_pnm(ss.str());
    } catch (const ImageError& e) {
        throw ImageError(path.string() + ": " + e.what());
    }
}

void write_pnm(const std::filesystem::path& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageError("cannot write " + path.string());
    const std::string bytes = encode_pnm(img);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ImageError("failed writing " + path.string());
}

std::string to_string(TimeTag t) {
    switch (t) {
        case TimeTag::day: return "day";
        case TimeTag::night: return "night";
        case TimeTag::unknown: return "unknown";
    }
    return "unknown";
}

TimeTag parse_time_tag(const std::string& text) {
    if (text == "day") return TimeTag::day;
    if (text == "night") return TimeTag::night;
    if (text == "unknown" || text.empty()) return TimeTag::unknown;
    throw std::invalid_argument("unknown time tag '" + text + "'");
}

ImagePair load_image_pair(const std::filesystem::path& color_path,
                          const std::filesystem::path& thermal_path) {
    ImagePair pair;
    pair.color = read_pnm(color_path);
    pair.thermal = read_pnm(thermal_path);
    if (pair.color.channels != 3) throw ImageError(color_path.string() + ": color frame must be P6");
    if (pair.thermal.channels != 1)
        throw ImageError(thermal_path.string() + ": thermal frame must be P5");
    if (pair.color.width != pair.thermal.width || pair.color.height != pair.thermal.height)
        throw ImageError("color/thermal alignment error: " + std::to_string(pair.color.width) + "x" +
                         std::to_string(pair.color.height) + " vs " +
                         std::to_string(pair.thermal.width) + "x" +
                         std::to_string(pair.thermal.height));
    pair.id = color_path.stem().string();
    return pair;
}

}  // namespace gfd
