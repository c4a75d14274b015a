#pragma once

#include <string>
#include <vector>

#include "tgode/tensor.hpp"

namespace tgode {

// Versioned binary checkpoint: magic "TGODE1", then one record per tensor:
// u32 name length, name bytes, u32 rank, u32 dims, little-endian f32 payload.
// Records are written in registration order, which makes saves byte-reproducible.
void save_checkpoint(const std::string& path, const std::vector<const Param*>& params);

struct CheckpointEntry {
  std::string name;
  std::vector<int> dims;
  std::vector<float> data;
};

std::vector<CheckpointEntry> read_checkpoint(const std::string& path);

// Restore values into matching parameters; throws MismatchError when a
// parameter is missing or its shape differs.
void load_checkpoint(const std::string& path, const std::vector<Param*>& params);

}  // namespace tgode
