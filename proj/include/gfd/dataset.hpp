#pragma once

// On-disk dataset layout:
//   <root>/color/<id>.ppm     binary P6
//   <root>/thermal/<id>.pgm   binary P5
//   <root>/ann/<id>.txt       "<class> <x> <y> <w> <h>" per object
//   <root>/meta.csv           optional "id,time_tag" with a header row

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gfd/annotation.hpp"
#include "gfd/image.hpp"
#include "gfd/synth.hpp"

namespace gfd {

struct Sample {
    ImagePair pair;
    std::vector<GroundTruth> gts;
};

void write_dataset(const std::filesystem::path& root, std::span<const SynthSample> samples);

/// Loads every id found under color/, sorted by id. Throws ImageError,
/// AnnotationError (annotated with the file), or std::runtime_error.
std::vector<Sample> load_dataset(const std::filesystem::path& root);

}  // namespace gfd
