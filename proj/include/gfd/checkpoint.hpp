#pragma once

// File layout: a text header, raw little-endian doubles, then an 8-byte
// little-endian FNV-1a 64 checksum of everything before it.
//
//   GFDSSD-CKPT 1
//   fingerprint <16 hex>
//   model <ModelConfig::describe()>
//   params <count>
//   <name> <n> <c> <h> <w>      (one line per parameter)
//   data

#include <filesystem>
#include <stdexcept>
#include <string>

#include "gfd/model.hpp"

namespace gfd {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string serialize_checkpoint(Detector& model);
void save_checkpoint(const std::filesystem::path& path, Detector& model);

/// Fingerprint stored in a checkpoint, after verifying its checksum.
std::string checkpoint_fingerprint(const std::string& bytes);

/// Overwrites the model's parameters. Throws CheckpointError on a checksum
/// failure, a fingerprint mismatch, or any name/shape disagreement.
void deserialize_checkpoint(const std::string& bytes, Detector& model);
void load_checkpoint(const std::filesystem::path& path, Detector& model);

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::string& bytes);

}  // namespace gfd
