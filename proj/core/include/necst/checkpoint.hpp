#pragma once

#include <string>

#include "necst/model.hpp"

namespace necst::io {

// Model plus the training provenance stored alongside it.
struct Checkpoint {
  NecstModel model;
  TrainConfig config_echo;
  std::uint64_t seed_lineage = 0;
};

// Binary format, little-endian throughout:
//   magic "NECSTCKP", u32 version,
//   model header (dims, channel, decoder family, variance, layer table),
//   train-config echo and seed lineage,
//   all weights/biases as f32 arrays in layer order (encoder then decoder),
//   trailing u64 FNV-1a checksum over everything after the version field.
// Files are written to a temporary path and renamed on success.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
void save_checkpoint(const NecstModel& model, const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace necst::io
