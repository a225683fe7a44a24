#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crobust/image.hpp"

namespace crobust {

// The 19 corruption kinds, in report order (Noise, Blur, Weather, Digital).
enum class CorruptionKind : int {
  gaussian_noise = 0,
  shot_noise,
  impulse_noise,
  speckle_noise,
  defocus_blur,
  glass_blur,
  motion_blur,
  zoom_blur,
  gaussian_blur,
  snow,
  frost,
  fog,
  brightness,
  spatter,
  contrast,
  elastic_transform,
  pixelate,
  jpeg_compression,
  saturate,
};

inline constexpr int kCorruptionCount = 19;
inline constexpr int kSeverityCount = 5;

const std::array<CorruptionKind, kCorruptionCount>& all_corruptions();
std::string_view corruption_name(CorruptionKind kind);
std::optional<CorruptionKind> corruption_from_name(std::string_view name);
// Table-1 grouping: "Noise", "Blur", "Weather" or "Digital".
std::string_view corruption_group(CorruptionKind kind);

struct CorruptionSpec {
  CorruptionKind kind;
  int severity;  // 1..5
  uint64_t seed;

  CorruptionSpec(CorruptionKind k, int s, uint64_t sd);
};

// Complete numeric parameterization of one (kind, severity) cell, keyed by
// parameter name. Exposed for tests and the --dump-severity-tables output.
using SeverityParams = std::map<std::string, double>;

SeverityParams severity_params(CorruptionKind kind, int severity);

// Human-readable JSON document of every (kind, severity) parameter record.
std::string severity_tables_json();

// Pure function of (image, spec): same shape out, values clipped to [0,1],
// bit-deterministic. Blur and elastic kinds reject images smaller than 8px.
ImageTensor apply_corruption(const ImageTensor& image, const CorruptionSpec& spec);

// Midpoint-displacement plasma field, size = 2^k + 1, normalized to [0,1].
// Used by fog, and for the frost/spatter procedural textures.
Tensor diamond_square(int size, double roughness, uint64_t seed);

// Batch driver: image i is corrupted with seed derive(base_seed, i).
// Parallel execution is bit-identical to sequential.
std::vector<ImageTensor> corrupt_dataset(const std::vector<ImageTensor>& images,
                                         CorruptionKind kind, int severity, uint64_t base_seed,
                                         int threads = 1);

}  // namespace crobust
