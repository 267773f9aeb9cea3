#pragma once

#include "gfd/image.hpp"

namespace gfd {

/// Contrast-limited adaptive histogram equalization of a grayscale image.
///
/// The image is split into tiles_x x tiles_y equal tiles (edge-reflected when
/// the size does not divide evenly). Each tile's 256-bin histogram is clipped
/// at clip_limit * tile_pixels / 256 counts, the excess spread evenly over all
/// bins, and turned into an equalization mapping. Output pixels blend the
/// mappings of the four nearest tile centers bilinearly.
///
/// Throws std::invalid_argument for non-grayscale input, tiles < 1,
/// clip_limit <= 0, or an image smaller than the tile grid.
Image clahe(const Image& gray, int tiles_x = 8, int tiles_y = 8, double clip_limit = 2.0);

}  // namespace gfd
