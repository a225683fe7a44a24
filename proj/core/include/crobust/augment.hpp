#pragma once

#include <cstdint>
#include <utility>

#include "crobust/image.hpp"

namespace crobust {

// Stochastic augmentation family: random resized crop (restored to the
// original extent), horizontal flip, color jitter (brightness, contrast,
// saturation in that fixed order), random grayscale.
struct AugmentationSpec {
  float crop_min = 0.8f;   // crop fraction range (0,1]
  float crop_max = 1.0f;
  float flip_prob = 0.5f;
  float color_strength = 0.2f;
  float gray_prob = 0.1f;
  uint64_t seed = 0;

  void validate() const;
};

// One draw from the family; draw_index selects the independent stream
// (0 and 1 are the two views of augment_pair).
ImageTensor augment_draw(const ImageTensor& image, const AugmentationSpec& spec,
                         uint64_t draw_index);

// Two independent draws applied to the same image.
std::pair<ImageTensor, ImageTensor> augment_pair(const ImageTensor& image,
                                                 const AugmentationSpec& spec);

}  // namespace crobust
