#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "adhominem/model/parameters.hpp"
#include "adhominem/textprep/encode.hpp"
#include "json.hpp"

namespace adhominem::model {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointMetadata {
  int format_version = kCheckpointVersion;
  ModelDimensions dims;
  textprep::EncodingConfig encoding;
  std::string vocab_hash;
  std::uint64_t training_seed = 0;
  double tau_s = 1.0;
  double tau_d = 3.0;
};

struct Checkpoint {
  CheckpointMetadata metadata;
  ModelParameters params;
};

nlohmann::json to_json(const textprep::EncodingConfig& cfg);
textprep::EncodingConfig encoding_from_json(const nlohmann::json& j);

// Layout: 8-byte magic "ADHCKPT1", u64 metadata length, metadata JSON, u32
// parameter count, then per parameter: u32 name length, name, u32 rank,
// u64 dims, little-endian f64 values in row-major order.
void save_checkpoint(const std::filesystem::path& path, const ModelParameters& params, const CheckpointMetadata& meta);

// Verifies every parameter name and shape against the metadata dimensions.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace adhominem::model
