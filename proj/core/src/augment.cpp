#include "crobust/augment.hpp"

#include <algorithm>
#include <cmath>

#include "crobust/errors.hpp"
#include "crobust/rng.hpp"

namespace crobust {

void AugmentationSpec::validate() const {
  if (!(crop_min > 0.0f) || crop_min > crop_max || crop_max > 1.0f) {
    throw ConfigError("crop fraction range must satisfy 0 < min <= max <= 1");
  }
  for (float p : {flip_prob, gray_prob}) {
    if (p < 0.0f || p > 1.0f) throw ConfigError("augmentation probabilities must be in [0,1]");
  }
  if (color_strength < 0.0f || color_strength > 1.0f) {
    throw ConfigError("color distortion strength must be in [0,1]");
  }
}

ImageTensor augment_draw(const ImageTensor& image, const AugmentationSpec& spec,
                         uint64_t draw_index) {
  spec.validate();
  CounterRng rng(CounterRng::derive(spec.seed, 0x617567ULL, draw_index));

  // All randomness is drawn up front in a fixed order, so the draw layout
  // never depends on which transforms end up active.
  const float frac = rng.uniform(spec.crop_min, spec.crop_max);
  const float off_y = rng.next_float();
  const float off_x = rng.next_float();
  const bool flip = rng.next_float() < spec.flip_prob;
  const float s = spec.color_strength;
  const float bright = rng.uniform(-0.5f * s, 0.5f * s);
  const float contrast = rng.uniform(1.0f - s, 1.0f + s);
  const float saturation = rng.uniform(1.0f - s, 1.0f + s);
  const bool gray = rng.next_float() < spec.gray_prob;

  ImageTensor out = image;

  // crop + resize back
  const int ch = std::max(1, static_cast<int>(std::lround(frac * image.height)));
  const int cw = std::max(1, static_cast<int>(std::lround(frac * image.width)));
  if (ch < image.height || cw < image.width) {
    const int y0 = static_cast<int>(off_y * static_cast<float>(image.height - ch + 1));
    const int x0 = static_cast<int>(off_x * static_cast<float>(image.width - cw + 1));
    ImageTensor crop(ch, cw);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < ch; ++y) {
        for (int x = 0; x < cw; ++x) crop.at(c, y, x) = image.at(c, y0 + y, x0 + x);
      }
    }
    out = resize_bilinear(crop, image.height, image.width);
  }

  if (flip) out = hflip(out);

  if (bright != 0.0f) {
    for (auto& v : out.data) v += bright;
  }
  if (contrast != 1.0f) {
    double mean = 0.0;
    for (float v : out.data) mean += v;
    const float m = static_cast<float>(mean / static_cast<double>(out.data.size()));
    for (auto& v : out.data) v = (v - m) * contrast + m;
  }
  if (saturation != 1.0f) {
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        const float g = luma(out, y, x);
        for (int c = 0; c < 3; ++c) out.at(c, y, x) = g + saturation * (out.at(c, y, x) - g);
      }
    }
  }
  if (gray) {
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        const float g = luma(out, y, x);
        for (int c = 0; c < 3; ++c) out.at(c, y, x) = g;
      }
    }
  }

  clamp01(out);
  return out;
}

std::pair<ImageTensor, ImageTensor> augment_pair(const ImageTensor& image,
                                                 const AugmentationSpec& spec) {
  return {augment_draw(image, spec, 0), augment_draw(image, spec, 1)};
}

}  // namespace crobust
