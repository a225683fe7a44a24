#include "crobust/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace crobust {

ImageTensor ImageTensor::from_tensor(const Tensor& t) {
  if (t.rank() != 3 || t.shape[0] != 3) {
    throw DimensionError("expected [3,H,W] tensor, got " + Tensor::shape_str(t.shape));
  }
  ImageTensor img(static_cast<int>(t.shape[1]), static_cast<int>(t.shape[2]));
  img.data = t.data;
  return img;
}

Tensor stack_images(const std::vector<ImageTensor>& images) {
  if (images.empty()) throw DimensionError("cannot stack an empty image list");
  const int h = images[0].height, w = images[0].width;
  Tensor out({static_cast<int64_t>(images.size()), 3, h, w});
  const size_t stride = images[0].data.size();
  for (size_t i = 0; i < images.size(); ++i) {
    if (!images[i].same_shape(images[0])) {
      throw DimensionError("stack_images requires uniform shapes");
    }
    std::memcpy(out.data.data() + i * stride, images[i].data.data(), stride * sizeof(float));
  }
  return out;
}

void clamp01(ImageTensor& img) {
  for (auto& v : img.data) v = std::clamp(v, 0.0f, 1.0f);
}

bool in_unit_range(const ImageTensor& img) {
  for (float v : img.data) {
    if (!(v >= 0.0f && v <= 1.0f)) return false;
  }
  return true;
}

float luma(const ImageTensor& img, int y, int x) {
  return 0.299f * img.at(0, y, x) + 0.587f * img.at(1, y, x) + 0.114f * img.at(2, y, x);
}

float sample_bilinear(const ImageTensor& img, int c, float y, float x) {
  const float yc = std::clamp(y, 0.0f, static_cast<float>(img.height - 1));
  const float xc = std::clamp(x, 0.0f, static_cast<float>(img.width - 1));
  const int y0 = static_cast<int>(yc);
  const int x0 = static_cast<int>(xc);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const float fy = yc - static_cast<float>(y0);
  const float fx = xc - static_cast<float>(x0);
  const float top = img.at(c, y0, x0) * (1.0f - fx) + img.at(c, y0, x1) * fx;
  const float bot = img.at(c, y1, x0) * (1.0f - fx) + img.at(c, y1, x1) * fx;
  return top * (1.0f - fy) + bot * fy;
}

ImageTensor resize_bilinear(const ImageTensor& img, int out_h, int out_w) {
  ImageTensor out(out_h, out_w);
  const float sy = static_cast<float>(img.height) / static_cast<float>(out_h);
  const float sx = static_cast<float>(img.width) / static_cast<float>(out_w);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < out_h; ++y) {
      const float src_y = (static_cast<float>(y) + 0.5f) * sy - 0.5f;
      for (int x = 0; x < out_w; ++x) {
        const float src_x = (static_cast<float>(x) + 0.5f) * sx - 0.5f;
        out.at(c, y, x) = sample_bilinear(img, c, src_y, src_x);
      }
    }
  }
  return out;
}

ImageTensor hflip(const ImageTensor& img) {
  ImageTensor out(img.height, img.width);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        out.at(c, y, x) = img.at(c, y, img.width - 1 - x);
      }
    }
  }
  return out;
}

ImageTensor convolve_replicate(const ImageTensor& img, const std::vector<float>& kernel, int k) {
  if (k < 1 || k % 2 == 0 || static_cast<int>(kernel.size()) != k * k) {
    throw DimensionError("convolve_replicate kernel must be odd square");
  }
  const int r = k / 2;
  ImageTensor out(img.height, img.width);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        float acc = 0.0f;
        for (int ky = 0; ky < k; ++ky) {
          const int yy = std::clamp(y + ky - r, 0, img.height - 1);
          for (int kx = 0; kx < k; ++kx) {
            const int xx = std::clamp(x + kx - r, 0, img.width - 1);
            acc += kernel[static_cast<size_t>(ky) * k + kx] * img.at(c, yy, xx);
          }
        }
        out.at(c, y, x) = acc;
      }
    }
  }
  return out;
}

ImageTensor gaussian_blur_image(const ImageTensor& img, float sigma) {
  if (sigma <= 0.0f) return img;
  const int r = std::max(1, static_cast<int>(std::ceil(3.0f * sigma)));
  std::vector<float> k(static_cast<size_t>(2 * r + 1));
  float sum = 0.0f;
  for (int i = -r; i <= r; ++i) {
    const float v = std::exp(-0.5f * static_cast<float>(i) * static_cast<float>(i) /
                             (sigma * sigma));
    k[static_cast<size_t>(i + r)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;

  ImageTensor tmp(img.height, img.width);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        float acc = 0.0f;
        for (int i = -r; i <= r; ++i) {
          const int xx = std::clamp(x + i, 0, img.width - 1);
          acc += k[static_cast<size_t>(i + r)] * img.at(c, y, xx);
        }
        tmp.at(c, y, x) = acc;
      }
    }
  }
  ImageTensor out(img.height, img.width);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        float acc = 0.0f;
        for (int i = -r; i <= r; ++i) {
          const int yy = std::clamp(y + i, 0, img.height - 1);
          acc += k[static_cast<size_t>(i + r)] * tmp.at(c, yy, x);
        }
        out.at(c, y, x) = acc;
      }
    }
  }
  return out;
}

double mean_abs_deviation(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw DimensionError("deviation requires equal shapes");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) acc += std::fabs(a.data[i] - b.data[i]);
  return acc / static_cast<double>(a.data.size());
}

double rms_deviation(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw DimensionError("deviation requires equal shapes");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.data.size()));
}

bool bit_equal(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) return false;
  return a.data.empty() ||
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

}  // namespace crobust
