#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gfd/box.hpp"

namespace gfd {

/// Label taxonomy of the source annotations. All four are trained as one
/// pedestrian class; the raw class survives for evaluation filtering.
enum class RawClass { person, people, cyclist, person_uncertain };

std::string to_string(RawClass c);  // "person?" for person_uncertain
RawClass parse_raw_class(std::string_view token);

enum class Visibility { both, color_only, thermal_only, unknown };
std::string to_string(Visibility v);

/// Top-left corner plus extent, in pixels.
struct PixelRect {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    bool operator==(const PixelRect&) const = default;
};

struct GroundTruth {
    PixelRect rect;
    RawClass raw_class = RawClass::person;
    Visibility visibility = Visibility::unknown;  // known for synthetic data only
};

/// Normalized center-form box of a pixel rectangle inside a width x height image.
Box normalize(const PixelRect& r, int width, int height);
PixelRect to_pixels(const Box& b, int width, int height);

/// Clips to [0,width] x [0,height]. Returns false if nothing positive remains.
bool clamp_to_image(PixelRect& r, int width, int height);

class AnnotationError : public std::runtime_error {
public:
    AnnotationError(const std::string& message, std::vector<int> lines)
        : std::runtime_error(message), lines_(std::move(lines)) {}
    const std::vector<int>& lines() const { return lines_; }

private:
    std::vector<int> lines_;
};

/// One object per line, "<class> <x> <y> <w> <h>". Blank lines and '#'
/// comments are skipped. Every malformed line is reported together.
std::vector<GroundTruth> parse_annotations(std::string_view text);

/// Inverse of parse_annotations; numbers use the shortest exact form.
std::string serialize_annotations(std::span<const GroundTruth> gts);

}  // namespace gfd
