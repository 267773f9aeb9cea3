#include "gfd/annotation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace gfd {

std::string to_string(RawClass c) {
    switch (c) {
        case RawClass::person: return "person";
        case RawClass::people: return "people";
        case RawClass::cyclist: return "cyclist";
        case RawClass::person_uncertain: return "person?";
    }
    return "person";
}

RawClass parse_raw_class(std::string_view token) {
    if (token == "person") return RawClass::person;
    if (token == "people") return RawClass::people;
    if (token == "cyclist") return RawClass::cyclist;
    if (token == "person?") return RawClass::person_uncertain;
    throw std::invalid_argument("unknown class '" + std::string(token) + "'");
}

std::string to_string(Visibility v) {
    switch (v) {
        case Visibility::both: return "both";
        case Visibility::color_only: return "color_only";
        case Visibility::thermal_only: return "thermal_only";
        case Visibility::unknown: return "unknown";
    }
    return "unknown";
}

Box normalize(const PixelRect& r, int width, int height) {
    return {(r.x + 0.5 * r.w) / width, (r.y + 0.5 * r.h) / height, r.w / width, r.h / height};
}

PixelRect to_pixels(const Box& b, int width, int height) {
    return {b.left() * width, b.top() * height, b.w * width, b.h * height};
}

bool clamp_to_image(PixelRect& r, int width, int height) {
    const double x0 = std::clamp(r.x, 0.0, static_cast<double>(width));
    const double y0 = std::clamp(r.y, 0.0, static_cast<double>(height));
    const double x1 = std::clamp(r.x + r.w, 0.0, static_cast<double>(width));
    const double y1 = std::clamp(r.y + r.h, 0.0, static_cast<double>(height));
    r = {x0, y0, x1 - x0, y1 - y0};
    return r.w > 0.0 && r.h > 0.0;
}

namespace {

bool parse_number(std::string_view tok, double& out) {
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

std::vector<GroundTruth> parse_annotations(std::string_view text) {
    std::vector<GroundTruth> out;
    std::vector<int> bad_lines;
    std::string problems;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

        std::vector<std::string_view> tokens;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            const std::size_t start = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            if (i > start) tokens.push_back(line.substr(start, i - start));
        }
        if (tokens.empty()) continue;

        auto fail = [&](const std::string& why) {
            bad_lines.push_back(line_no);
            problems += "\n  line " + std::to_string(line_no) + ": " + why;
        };
        if (tokens.size() != 5) {
            fail("expected '<class> <x> <y> <w> <h>', found " + std::to_string(tokens.size()) + " fields");
            continue;
        }
        GroundTruth gt;
        try {
            gt.raw_class = parse_raw_class(tokens[0]);
        } catch (const std::invalid_argument& e) {
            fail(e.what());
            continue;
        }
        double v[4];
        bool numeric = true;
        for (int k = 0; k < 4; ++k) numeric = numeric && parse_number(tokens[k + 1], v[k]);
        if (!numeric) {
            fail("non-numeric coordinate");
            continue;
        }
        if (v[2] <= 0.0 || v[3] <= 0.0) {
            fail("width and height must be positive");
            continue;
        }
        gt.rect = {v[0], v[1], v[2], v[3]};
        out.push_back(gt);
    }
    if (!bad_lines.empty()) throw AnnotationError("malformed annotation lines:" + problems, bad_lines);
    return out;
}

std::string serialize_annotations(std::span<const GroundTruth> gts) {
    std::string out;
    for (const auto& g : gts) {
        out += to_string(g.raw_class) + " " + format_number(g.rect.x) + " " + format_number(g.rect.y) +
               " " + format_number(g.rect.w) + " " + format_number(g.rect.h) + "\n";
    }
    return out;
}

}  // namespace gfd
