#pragma once

#include <string>
#include <vector>

#include "crobust/model.hpp"

namespace crobust {

// Checkpoint layout (little-endian):
//   magic "CRBT", u16 version,
//   arch block (7 x u32: input_size, class_count, conv0..2, projector_hidden,
//   projection_dim; u64 init seed),
//   u32 parameter record count, records, u32 optimizer-state record count,
//   records. Record: u16 name length, name, u8 rank, u32 dims[rank], f32
//   payload. Optimizer state reuses the record layout with a ".vel" suffix.
inline constexpr char kCheckpointMagic[4] = {'C', 'R', 'B', 'T'};
inline constexpr uint16_t kCheckpointVersion = 1;

std::vector<unsigned char> serialize_checkpoint(const ModelBundle& bundle);
ModelBundle deserialize_checkpoint(const std::vector<unsigned char>& bytes);

void save_checkpoint(const ModelBundle& bundle, const std::string& path);
ModelBundle load_checkpoint(const std::string& path);

// FNV-1a of the serialized checkpoint; stored in evaluation records so every
// reported number is traceable to exact weights.
uint64_t checkpoint_digest(const ModelBundle& bundle);

}  // namespace crobust
