#pragma once

#include <cstdint>
#include <vector>

#include "crobust/tensor.hpp"

namespace crobust {

// RGB image, planar channel layout (data[c*H*W + y*W + x]), values in [0,1].
// Planar so conversion to/from network tensors is a plain copy.
struct ImageTensor {
  int height = 0;
  int width = 0;
  std::vector<float> data;

  ImageTensor() = default;
  ImageTensor(int h, int w) : height(h), width(w), data(static_cast<size_t>(3) * h * w, 0.0f) {
    if (h <= 0 || w <= 0) throw DimensionError("image dimensions must be positive");
  }

  float& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }

  size_t plane() const { return static_cast<size_t>(height) * width; }
  bool same_shape(const ImageTensor& o) const { return height == o.height && width == o.width; }

  Tensor to_tensor() const { return Tensor({3, height, width}, data); }
  static ImageTensor from_tensor(const Tensor& t);
};

// Packs images into a [batch,3,H,W] tensor; all must share one shape.
Tensor stack_images(const std::vector<ImageTensor>& images);

void clamp01(ImageTensor& img);
bool in_unit_range(const ImageTensor& img);
float luma(const ImageTensor& img, int y, int x);

// Bilinear sample with edge clamping; (y, x) in pixel coordinates.
float sample_bilinear(const ImageTensor& img, int c, float y, float x);

ImageTensor resize_bilinear(const ImageTensor& img, int out_h, int out_w);
ImageTensor hflip(const ImageTensor& img);

// Depthwise 2D convolution with replicated edges; kernel is k x k, k odd.
ImageTensor convolve_replicate(const ImageTensor& img, const std::vector<float>& kernel, int k);

// Separable Gaussian blur, kernel radius ceil(3*sigma). sigma <= 0 is identity.
ImageTensor gaussian_blur_image(const ImageTensor& img, float sigma);

// Mean absolute per-pixel deviation and RMS deviation between two images.
double mean_abs_deviation(const ImageTensor& a, const ImageTensor& b);
double rms_deviation(const ImageTensor& a, const ImageTensor& b);

bool bit_equal(const ImageTensor& a, const ImageTensor& b);

}  // namespace crobust
