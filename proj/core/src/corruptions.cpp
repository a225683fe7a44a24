#include "crobust/corruptions.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "crobust/errors.hpp"
#include "crobust/parallel.hpp"
#include "crobust/rng.hpp"

namespace crobust {

namespace {

constexpr std::array<std::string_view, kCorruptionCount> kNames = {
    "gaussian_noise", "shot_noise", "impulse_noise",     "speckle_noise", "defocus_blur",
    "glass_blur",     "motion_blur", "zoom_blur",         "gaussian_blur", "snow",
    "frost",          "fog",         "brightness",        "spatter",       "contrast",
    "elastic_transform", "pixelate", "jpeg_compression",  "saturate"};

constexpr std::array<std::string_view, kCorruptionCount> kGroups = {
    "Noise", "Noise", "Noise", "Noise", "Blur",    "Blur",    "Blur",    "Blur",    "Blur",
    "Weather", "Weather", "Weather", "Weather", "Weather", "Digital", "Digital", "Digital",
    "Digital", "Digital"};

// Blur and warp parameters scale with min(H,W)/32 so severities stay
// comparable between 32px desk images and larger inputs.
double resolution_scale(const ImageTensor& img) {
  return static_cast<double>(std::min(img.height, img.width)) / 32.0;
}

bool needs_min_extent(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::defocus_blur:
    case CorruptionKind::glass_blur:
    case CorruptionKind::motion_blur:
    case CorruptionKind::zoom_blur:
    case CorruptionKind::gaussian_blur:
    case CorruptionKind::elastic_transform:
      return true;
    default:
      return false;
  }
}

template <size_t N>
double pick(const std::array<double, N>& table, int severity) {
  return table[static_cast<size_t>(severity - 1)];
}

// --- plasma field helpers -------------------------------------------------

// Smallest 2^k+1 field covering both image extents.
int plasma_size_for(int h, int w) {
  int size = 2;
  while (size + 1 < std::max(h, w)) size *= 2;
  return size + 1;
}

float field_at(const Tensor& field, int y, int x) {
  const int n = static_cast<int>(field.shape[0]);
  return field.data[static_cast<size_t>(std::min(y, n - 1)) * n + std::min(x, n - 1)];
}

// --- shared raster helpers ------------------------------------------------

std::vector<float> disk_kernel(double radius, int& k_out) {
  const int r = std::max(1, static_cast<int>(std::ceil(radius)));
  const int k = 2 * r + 1;
  std::vector<float> kernel(static_cast<size_t>(k) * k);
  float sum = 0.0f;
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      const double d = std::sqrt(static_cast<double>(y) * y + static_cast<double>(x) * x);
      // soft one-pixel rim keeps small radii from collapsing to a cross
      const float v = static_cast<float>(std::clamp(radius + 0.5 - d, 0.0, 1.0));
      kernel[static_cast<size_t>(y + r) * k + (x + r)] = v;
      sum += v;
    }
  }
  for (auto& v : kernel) v /= sum;
  k_out = k;
  return kernel;
}

std::vector<float> motion_kernel(double length, double angle_rad, int& k_out) {
  const int half = std::max(1, static_cast<int>(std::ceil((length - 1.0) / 2.0)));
  const int k = 2 * half + 1;
  std::vector<float> kernel(static_cast<size_t>(k) * k, 0.0f);
  const double cy = half, cx = half;
  const double dy = std::sin(angle_rad), dx = std::cos(angle_rad);
  const int steps = std::max(2, static_cast<int>(std::lround(length * 4)));
  for (int i = 0; i < steps; ++i) {
    const double t = (static_cast<double>(i) / (steps - 1) - 0.5) * (length - 1.0);
    const double y = cy + t * dy, x = cx + t * dx;
    const int y0 = static_cast<int>(std::floor(y)), x0 = static_cast<int>(std::floor(x));
    const double fy = y - y0, fx = x - x0;
    for (int oy = 0; oy <= 1; ++oy) {
      for (int ox = 0; ox <= 1; ++ox) {
        const int yy = y0 + oy, xx = x0 + ox;
        if (yy < 0 || yy >= k || xx < 0 || xx >= k) continue;
        const double w = (oy ? fy : 1.0 - fy) * (ox ? fx : 1.0 - fx);
        kernel[static_cast<size_t>(yy) * k + xx] += static_cast<float>(w);
      }
    }
  }
  float sum = 0.0f;
  for (float v : kernel) sum += v;
  for (auto& v : kernel) v /= sum;
  k_out = k;
  return kernel;
}

// --- per-kind implementations ----------------------------------------------

ImageTensor gaussian_noise_impl(const ImageTensor& x, double sigma, uint64_t seed) {
  ImageTensor out = x;
  CounterRng rng(CounterRng::derive(seed, 0x6761757373ULL));
  for (auto& v : out.data) v += static_cast<float>(sigma) * rng.normal();
  return out;
}

ImageTensor shot_noise_impl(const ImageTensor& x, double photons, uint64_t seed) {
  ImageTensor out = x;
  CounterRng rng(CounterRng::derive(seed, 0x73686f74ULL));
  for (auto& v : out.data) {
    v = static_cast<float>(rng.poisson(static_cast<double>(v) * photons) / photons);
  }
  return out;
}

ImageTensor impulse_noise_impl(const ImageTensor& x, double prob, uint64_t seed) {
  ImageTensor out = x;
  CounterRng rng(CounterRng::derive(seed, 0x696d70ULL));
  for (auto& v : out.data) {
    const float u = rng.next_float();
    const float salt = rng.next_float();
    if (u < static_cast<float>(prob)) v = salt < 0.5f ? 0.0f : 1.0f;
  }
  return out;
}

ImageTensor speckle_noise_impl(const ImageTensor& x, double sigma, uint64_t seed) {
  ImageTensor out = x;
  CounterRng rng(CounterRng::derive(seed, 0x7370656bULL));
  for (auto& v : out.data) v += v * static_cast<float>(sigma) * rng.normal();
  return out;
}

ImageTensor defocus_blur_impl(const ImageTensor& x, double radius) {
  int k = 0;
  const auto kernel = disk_kernel(radius, k);
  return convolve_replicate(x, kernel, k);
}

ImageTensor glass_blur_impl(const ImageTensor& x, double sigma, int delta, int iters,
                            uint64_t seed) {
  ImageTensor out = gaussian_blur_image(x, static_cast<float>(sigma));
  CounterRng rng(CounterRng::derive(seed, 0x676c617373ULL));
  const int span = 2 * delta + 1;
  for (int it = 0; it < iters; ++it) {
    for (int y = 0; y < out.height; ++y) {
      for (int xx = 0; xx < out.width; ++xx) {
        const int dy = static_cast<int>(rng.next_below(static_cast<uint64_t>(span))) - delta;
        const int dx = static_cast<int>(rng.next_below(static_cast<uint64_t>(span))) - delta;
        const int sy = std::clamp(y + dy, 0, out.height - 1);
        const int sx = std::clamp(xx + dx, 0, out.width - 1);
        for (int c = 0; c < 3; ++c) std::swap(out.at(c, y, xx), out.at(c, sy, sx));
      }
    }
  }
  return gaussian_blur_image(out, static_cast<float>(sigma));
}

ImageTensor motion_blur_impl(const ImageTensor& x, double length, uint64_t seed) {
  CounterRng rng(CounterRng::derive(seed, 0x6d6f74696fULL));
  const double angle = rng.uniform(0.0f, 3.14159265f);
  int k = 0;
  const auto kernel = motion_kernel(length, angle, k);
  return convolve_replicate(x, kernel, k);
}

ImageTensor zoom_blur_impl(const ImageTensor& x, double zoom_max) {
  constexpr int kSteps = 7;
  ImageTensor acc(x.height, x.width);
  const double cy = (x.height - 1) / 2.0, cx = (x.width - 1) / 2.0;
  for (int s = 0; s < kSteps; ++s) {
    const double z = 1.0 + (zoom_max - 1.0) * s / (kSteps - 1);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < x.height; ++y) {
        for (int xx = 0; xx < x.width; ++xx) {
          const float sy = static_cast<float>(cy + (y - cy) / z);
          const float sx = static_cast<float>(cx + (xx - cx) / z);
          acc.at(c, y, xx) += sample_bilinear(x, c, sy, sx);
        }
      }
    }
  }
  for (auto& v : acc.data) v /= static_cast<float>(kSteps);
  return acc;
}

ImageTensor snow_impl(const ImageTensor& x, double density, double flake_len, double whiten,
                      uint64_t seed) {
  CounterRng rng(CounterRng::derive(seed, 0x736e6f77ULL));
  ImageTensor flakes(x.height, x.width);
  for (int y = 0; y < x.height; ++y) {
    for (int xx = 0; xx < x.width; ++xx) {
      const float u = rng.next_float();
      const float v = u > 1.0f - static_cast<float>(density) ? 1.0f : 0.0f;
      for (int c = 0; c < 3; ++c) flakes.at(c, y, xx) = v;
    }
  }
  const double angle = -(60.0 + rng.uniform(0.0f, 20.0f)) * 3.14159265 / 180.0;
  int k = 0;
  const auto kernel = motion_kernel(flake_len, angle, k);
  ImageTensor streaks = convolve_replicate(flakes, kernel, k);
  const float gain = static_cast<float>(flake_len) * 0.7f;

  ImageTensor out(x.height, x.width);
  const float w = static_cast<float>(whiten);
  for (int y = 0; y < x.height; ++y) {
    for (int xx = 0; xx < x.width; ++xx) {
      const float lift = std::max(luma(x, y, xx) * 1.5f + 0.1f, 0.0f);
      for (int c = 0; c < 3; ++c) {
        const float base = (1.0f - w) * x.at(c, y, xx) + w * std::max(x.at(c, y, xx), lift);
        out.at(c, y, xx) = base + streaks.at(c, y, xx) * gain;
      }
    }
  }
  return out;
}

ImageTensor frost_impl(const ImageTensor& x, double weight, double ridge_power, uint64_t seed) {
  const Tensor field =
      diamond_square(plasma_size_for(x.height, x.width), 0.6, CounterRng::derive(seed, 0x66726fULL));
  constexpr float kTint[3] = {0.88f, 0.94f, 1.0f};
  ImageTensor out(x.height, x.width);
  for (int y = 0; y < x.height; ++y) {
    for (int xx = 0; xx < x.width; ++xx) {
      const float f = field_at(field, y, xx);
      const float ridge = 1.0f - std::fabs(2.0f * f - 1.0f);  // crystal veins
      const float o = static_cast<float>(weight * std::pow(ridge, ridge_power));
      for (int c = 0; c < 3; ++c) {
        out.at(c, y, xx) = x.at(c, y, xx) * (1.0f - o) + o * kTint[c];
      }
    }
  }
  return out;
}

ImageTensor fog_impl(const ImageTensor& x, double weight, double roughness, uint64_t seed) {
  const Tensor field = diamond_square(plasma_size_for(x.height, x.width), roughness,
                                      CounterRng::derive(seed, 0x666f67ULL));
  constexpr float kFogTone = 0.92f;
  ImageTensor out(x.height, x.width);
  for (int y = 0; y < x.height; ++y) {
    for (int xx = 0; xx < x.width; ++xx) {
      const float t = static_cast<float>(weight) * field_at(field, y, xx);
      for (int c = 0; c < 3; ++c) {
        out.at(c, y, xx) = x.at(c, y, xx) * (1.0f - t) + t * kFogTone;
      }
    }
  }
  return out;
}

ImageTensor brightness_impl(const ImageTensor& x, double delta) {
  ImageTensor out = x;
  for (auto& v : out.data) v += static_cast<float>(delta);
  return out;
}

ImageTensor spatter_impl(const ImageTensor& x, double threshold, double opacity, uint64_t seed) {
  const Tensor field = diamond_square(plasma_size_for(x.height, x.width), 0.65,
                                      CounterRng::derive(seed, 0x73706174ULL));
  constexpr float kDroplet[3] = {0.33f, 0.25f, 0.16f};  // mud tone
  ImageTensor out(x.height, x.width);
  const float t0 = static_cast<float>(threshold), t1 = static_cast<float>(threshold) + 0.1f;
  for (int y = 0; y < x.height; ++y) {
    for (int xx = 0; xx < x.width; ++xx) {
      const float f = field_at(field, y, xx);
      const float m = std::clamp((f - t0) / (t1 - t0), 0.0f, 1.0f);
      const float a = static_cast<float>(opacity) * m;
      for (int c = 0; c < 3; ++c) {
        out.at(c, y, xx) = x.at(c, y, xx) * (1.0f - a) + a * kDroplet[c];
      }
    }
  }
  return out;
}

ImageTensor contrast_impl(const ImageTensor& x, double factor) {
  double mean[3] = {0.0, 0.0, 0.0};
  for (int c = 0; c < 3; ++c) {
    for (size_t i = 0; i < x.plane(); ++i) mean[c] += x.data[c * x.plane() + i];
    mean[c] /= static_cast<double>(x.plane());
  }
  ImageTensor out(x.height, x.width);
  for (int c = 0; c < 3; ++c) {
    const float m = static_cast<float>(mean[c]);
    const float f = static_cast<float>(factor);
    for (size_t i = 0; i < x.plane(); ++i) {
      out.data[c * x.plane() + i] = (x.data[c * x.plane() + i] - m) * f + m;
    }
  }
  return out;
}

ImageTensor elastic_impl(const ImageTensor& x, double amplitude, double field_sigma,
                         uint64_t seed) {
  CounterRng rng(CounterRng::derive(seed, 0x656c6173ULL));
  ImageTensor disp(x.height, x.width);  // channel 0 = dy, channel 1 = dx
  for (int y = 0; y < x.height; ++y) {
    for (int xx = 0; xx < x.width; ++xx) {
      disp.at(0, y, xx) = rng.uniform(-1.0f, 1.0f);
      disp.at(1, y, xx) = rng.uniform(-1.0f, 1.0f);
    }
  }
  disp = gaussian_blur_image(disp, static_cast<float>(field_sigma));
  // renormalize the smoothed field so amplitude means peak pixels of shift
  float peak = 1e-6f;
  for (size_t i = 0; i < 2 * disp.plane(); ++i) peak = std::max(peak, std::fabs(disp.data[i]));
  const float gain = static_cast<float>(amplitude) / peak;

  ImageTensor out(x.height, x.width);
  for (int y = 0; y < x.height; ++y) {
    for (int xx = 0; xx < x.width; ++xx) {
      const float sy = static_cast<float>(y) + gain * disp.at(0, y, xx);
      const float sx = static_cast<float>(xx) + gain * disp.at(1, y, xx);
      for (int c = 0; c < 3; ++c) out.at(c, y, xx) = sample_bilinear(x, c, sy, sx);
    }
  }
  return out;
}

ImageTensor pixelate_impl(const ImageTensor& x, double fraction) {
  const int hs = std::max(1, static_cast<int>(std::lround(x.height * fraction)));
  const int ws = std::max(1, static_cast<int>(std::lround(x.width * fraction)));
  // box-average downscale
  ImageTensor small(hs, ws);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < hs; ++y) {
      const int y0 = y * x.height / hs, y1 = std::max(y0 + 1, (y + 1) * x.height / hs);
      for (int xx = 0; xx < ws; ++xx) {
        const int x0 = xx * x.width / ws, x1 = std::max(x0 + 1, (xx + 1) * x.width / ws);
        float acc = 0.0f;
        for (int yy = y0; yy < y1; ++yy) {
          for (int xi = x0; xi < x1; ++xi) acc += x.at(c, yy, xi);
        }
        small.at(c, y, xx) = acc / static_cast<float>((y1 - y0) * (x1 - x0));
      }
    }
  }
  // nearest upscale back
  ImageTensor out(x.height, x.width);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < x.height; ++y) {
      const int sy = std::min(hs - 1, y * hs / x.height);
      for (int xx = 0; xx < x.width; ++xx) {
        const int sx = std::min(ws - 1, xx * ws / x.width);
        out.at(c, y, xx) = small.at(c, sy, sx);
      }
    }
  }
  return out;
}

// Baseline-JPEG quantization pipeline: YCbCr + 4:2:0 + 8x8 DCT + quality-
// scaled Annex-K tables, without entropy coding (the quantizer alone is
// what produces the pixel artifacts).
constexpr int kLumTable[64] = {16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,
                               55, 14, 13, 16, 24,  40,  57,  69,  56, 14, 17, 22, 29,  51,  87,
                               80, 62, 18, 22, 37,  56,  68,  109, 103, 77, 24, 35, 55,  64,  81,
                               104, 113, 92, 49, 64, 78,  87,  103, 121, 120, 101, 72, 92, 95,  98,
                               112, 100, 103, 99};
constexpr int kChrTable[64] = {17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
                               24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
                               99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
                               99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

struct DctBasis {
  float c[8][8];
  DctBasis() {
    for (int u = 0; u < 8; ++u) {
      const double s = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) {
        c[u][x] = static_cast<float>(s * std::cos((2.0 * x + 1.0) * u * 3.14159265358979 / 16.0));
      }
    }
  }
};

void quantize_plane(std::vector<float>& plane, int h, int w, const int table[64], int quality) {
  static const DctBasis basis;
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  float q[64];
  for (int i = 0; i < 64; ++i) {
    q[i] = static_cast<float>(std::clamp((table[i] * scale + 50) / 100, 1, 255));
  }
  float block[64], tmp[64];
  for (int by = 0; by < h; by += 8) {
    for (int bx = 0; bx < w; bx += 8) {
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) block[y * 8 + x] = plane[(by + y) * w + bx + x] - 128.0f;
      }
      // DCT rows then columns
      for (int u = 0; u < 8; ++u) {
        for (int y = 0; y < 8; ++y) {
          float acc = 0.0f;
          for (int x = 0; x < 8; ++x) acc += basis.c[u][x] * block[y * 8 + x];
          tmp[y * 8 + u] = acc;
        }
      }
      for (int v = 0; v < 8; ++v) {
        for (int u = 0; u < 8; ++u) {
          float acc = 0.0f;
          for (int y = 0; y < 8; ++y) acc += basis.c[v][y] * tmp[y * 8 + u];
          block[v * 8 + u] = acc;
        }
      }
      // quantize / dequantize
      for (int i = 0; i < 64; ++i) block[i] = std::nearbyint(block[i] / q[i]) * q[i];
      // inverse DCT columns then rows
      for (int u = 0; u < 8; ++u) {
        for (int y = 0; y < 8; ++y) {
          float acc = 0.0f;
          for (int v = 0; v < 8; ++v) acc += basis.c[v][y] * block[v * 8 + u];
          tmp[y * 8 + u] = acc;
        }
      }
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          float acc = 0.0f;
          for (int u = 0; u < 8; ++u) acc += basis.c[u][x] * tmp[y * 8 + u];
          plane[(by + y) * w + bx + x] = acc + 128.0f;
        }
      }
    }
  }
}

ImageTensor jpeg_impl(const ImageTensor& x, int quality) {
  const int ph = (x.height + 15) / 16 * 16;
  const int pw = (x.width + 15) / 16 * 16;
  std::vector<float> yp(static_cast<size_t>(ph) * pw);
  std::vector<float> cb(static_cast<size_t>(ph) * pw);
  std::vector<float> cr(static_cast<size_t>(ph) * pw);
  for (int yy = 0; yy < ph; ++yy) {
    const int sy = std::min(yy, x.height - 1);
    for (int xx = 0; xx < pw; ++xx) {
      const int sx = std::min(xx, x.width - 1);
      const float r = x.at(0, sy, sx) * 255.0f;
      const float g = x.at(1, sy, sx) * 255.0f;
      const float b = x.at(2, sy, sx) * 255.0f;
      yp[static_cast<size_t>(yy) * pw + xx] = 0.299f * r + 0.587f * g + 0.114f * b;
      cb[static_cast<size_t>(yy) * pw + xx] = 128.0f - 0.168736f * r - 0.331264f * g + 0.5f * b;
      cr[static_cast<size_t>(yy) * pw + xx] = 128.0f + 0.5f * r - 0.418688f * g - 0.081312f * b;
    }
  }
  // 4:2:0 chroma
  const int ch = ph / 2, cw = pw / 2;
  std::vector<float> cbs(static_cast<size_t>(ch) * cw), crs(static_cast<size_t>(ch) * cw);
  for (int yy = 0; yy < ch; ++yy) {
    for (int xx = 0; xx < cw; ++xx) {
      float acc_b = 0.0f, acc_r = 0.0f;
      for (int oy = 0; oy < 2; ++oy) {
        for (int ox = 0; ox < 2; ++ox) {
          acc_b += cb[static_cast<size_t>(2 * yy + oy) * pw + 2 * xx + ox];
          acc_r += cr[static_cast<size_t>(2 * yy + oy) * pw + 2 * xx + ox];
        }
      }
      cbs[static_cast<size_t>(yy) * cw + xx] = acc_b / 4.0f;
      crs[static_cast<size_t>(yy) * cw + xx] = acc_r / 4.0f;
    }
  }
  quantize_plane(yp, ph, pw, kLumTable, quality);
  quantize_plane(cbs, ch, cw, kChrTable, quality);
  quantize_plane(crs, ch, cw, kChrTable, quality);

  ImageTensor out(x.height, x.width);
  for (int yy = 0; yy < x.height; ++yy) {
    for (int xx = 0; xx < x.width; ++xx) {
      const float fy = yp[static_cast<size_t>(yy) * pw + xx];
      const float fb = cbs[static_cast<size_t>(yy / 2) * cw + xx / 2] - 128.0f;
      const float fr = crs[static_cast<size_t>(yy / 2) * cw + xx / 2] - 128.0f;
      out.at(0, yy, xx) = (fy + 1.402f * fr) / 255.0f;
      out.at(1, yy, xx) = (fy - 0.344136f * fb - 0.714136f * fr) / 255.0f;
      out.at(2, yy, xx) = (fy + 1.772f * fb) / 255.0f;
    }
  }
  return out;
}

ImageTensor saturate_impl(const ImageTensor& x, double factor, double shift) {
  ImageTensor out(x.height, x.width);
  for (int y = 0; y < x.height; ++y) {
    for (int xx = 0; xx < x.width; ++xx) {
      const float g = luma(x, y, xx);
      for (int c = 0; c < 3; ++c) {
        out.at(c, y, xx) =
            g + static_cast<float>(factor) * (x.at(c, y, xx) - g) + static_cast<float>(shift);
      }
    }
  }
  return out;
}

}  // namespace

const std::array<CorruptionKind, kCorruptionCount>& all_corruptions() {
  static const std::array<CorruptionKind, kCorruptionCount> kinds = [] {
    std::array<CorruptionKind, kCorruptionCount> a{};
    for (int i = 0; i < kCorruptionCount; ++i) a[static_cast<size_t>(i)] = CorruptionKind(i);
    return a;
  }();
  return kinds;
}

std::string_view corruption_name(CorruptionKind kind) {
  return kNames[static_cast<size_t>(kind)];
}

std::optional<CorruptionKind> corruption_from_name(std::string_view name) {
  for (int i = 0; i < kCorruptionCount; ++i) {
    if (kNames[static_cast<size_t>(i)] == name) return CorruptionKind(i);
  }
  return std::nullopt;
}

std::string_view corruption_group(CorruptionKind kind) {
  return kGroups[static_cast<size_t>(kind)];
}

CorruptionSpec::CorruptionSpec(CorruptionKind k, int s, uint64_t sd) : kind(k), severity(s), seed(sd) {
  if (s < 1 || s > kSeverityCount) {
    throw ConfigError("severity must be in 1..5, got " + std::to_string(s));
  }
}

SeverityParams severity_params(CorruptionKind kind, int severity) {
  if (severity < 1 || severity > kSeverityCount) {
    throw ConfigError("severity must be in 1..5, got " + std::to_string(severity));
  }
  using A = std::array<double, 5>;
  SeverityParams p;
  switch (kind) {
    case CorruptionKind::gaussian_noise:
      p["sigma"] = pick(A{0.04, 0.08, 0.14, 0.22, 0.32}, severity);
      break;
    case CorruptionKind::shot_noise:
      p["photons"] = pick(A{60.0, 25.0, 12.0, 5.0, 3.0}, severity);
      break;
    case CorruptionKind::impulse_noise:
      p["prob"] = pick(A{0.02, 0.05, 0.09, 0.16, 0.26}, severity);
      break;
    case CorruptionKind::speckle_noise:
      p["sigma"] = pick(A{0.12, 0.2, 0.32, 0.45, 0.6}, severity);
      break;
    case CorruptionKind::defocus_blur:
      p["radius"] = pick(A{1.0, 1.6, 2.2, 3.0, 4.0}, severity);
      break;
    case CorruptionKind::glass_blur:
      p["sigma"] = pick(A{0.45, 0.6, 0.75, 0.95, 1.2}, severity);
      p["delta"] = pick(A{1.0, 1.0, 2.0, 2.0, 3.0}, severity);
      p["iterations"] = pick(A{1.0, 2.0, 2.0, 3.0, 4.0}, severity);
      break;
    case CorruptionKind::motion_blur:
      p["length"] = pick(A{3.0, 5.0, 7.0, 10.0, 14.0}, severity);
      break;
    case CorruptionKind::zoom_blur:
      p["zoom_max"] = pick(A{1.06, 1.12, 1.18, 1.26, 1.35}, severity);
      p["steps"] = 7.0;
      break;
    case CorruptionKind::gaussian_blur:
      p["sigma"] = pick(A{0.5, 0.85, 1.3, 1.9, 2.6}, severity);
      break;
    case CorruptionKind::snow:
      p["density"] = pick(A{0.02, 0.04, 0.06, 0.09, 0.13}, severity);
      p["flake_length"] = pick(A{4.0, 6.0, 8.0, 10.0, 12.0}, severity);
      p["whiten"] = pick(A{0.1, 0.15, 0.2, 0.28, 0.35}, severity);
      break;
    case CorruptionKind::frost:
      p["weight"] = pick(A{0.18, 0.28, 0.38, 0.5, 0.62}, severity);
      p["ridge_power"] = pick(A{2.2, 1.9, 1.6, 1.3, 1.0}, severity);
      break;
    case CorruptionKind::fog:
      p["weight"] = pick(A{0.25, 0.38, 0.5, 0.65, 0.8}, severity);
      p["roughness"] = pick(A{0.75, 0.72, 0.68, 0.64, 0.6}, severity);
      break;
    case CorruptionKind::brightness:
      p["delta"] = pick(A{0.08, 0.15, 0.23, 0.32, 0.42}, severity);
      break;
    case CorruptionKind::spatter:
      p["threshold"] = pick(A{0.78, 0.72, 0.66, 0.6, 0.54}, severity);
      p["opacity"] = pick(A{0.35, 0.45, 0.55, 0.65, 0.75}, severity);
      break;
    case CorruptionKind::contrast:
      p["factor"] = pick(A{0.72, 0.58, 0.44, 0.3, 0.18}, severity);
      break;
    case CorruptionKind::elastic_transform:
      p["amplitude"] = pick(A{0.8, 1.5, 2.2, 3.2, 4.5}, severity);
      p["field_sigma"] = pick(A{8.0, 7.0, 6.4, 5.8, 5.1}, severity);
      break;
    case CorruptionKind::pixelate:
      p["fraction"] = pick(A{0.6, 0.45, 0.35, 0.28, 0.22}, severity);
      break;
    case CorruptionKind::jpeg_compression:
      p["quality"] = pick(A{28.0, 20.0, 15.0, 10.0, 6.0}, severity);
      break;
    case CorruptionKind::saturate:
      p["factor"] = pick(A{0.3, 0.12, 1.9, 3.2, 5.5}, severity);
      p["shift"] = pick(A{0.0, 0.0, 0.0, 0.05, 0.1}, severity);
      break;
  }
  return p;
}

std::string severity_tables_json() {
  nlohmann::ordered_json doc;
  for (CorruptionKind kind : all_corruptions()) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int s = 1; s <= kSeverityCount; ++s) {
      nlohmann::ordered_json row;
      row["severity"] = s;
      for (const auto& [k, v] : severity_params(kind, s)) row[k] = v;
      rows.push_back(std::move(row));
    }
    doc[std::string(corruption_name(kind))] = std::move(rows);
  }
  return doc.dump(2) + "\n";
}

ImageTensor apply_corruption(const ImageTensor& image, const CorruptionSpec& spec) {
  if (image.height <= 0 || image.width <= 0 || image.data.empty()) {
    throw DimensionError("apply_corruption on empty image");
  }
  if (needs_min_extent(spec.kind) && std::min(image.height, image.width) < 8) {
    throw ConfigError("input too small for " + std::string(corruption_name(spec.kind)) +
                      ": min dimension is " +
                      std::to_string(std::min(image.height, image.width)) + ", need >= 8");
  }
  const SeverityParams p = severity_params(spec.kind, spec.severity);
  const double scale = resolution_scale(image);

  ImageTensor out;
  switch (spec.kind) {
    case CorruptionKind::gaussian_noise:
      out = gaussian_noise_impl(image, p.at("sigma"), spec.seed);
      break;
    case CorruptionKind::shot_noise:
      out = shot_noise_impl(image, p.at("photons"), spec.seed);
      break;
    case CorruptionKind::impulse_noise:
      out = impulse_noise_impl(image, p.at("prob"), spec.seed);
      break;
    case CorruptionKind::speckle_noise:
      out = speckle_noise_impl(image, p.at("sigma"), spec.seed);
      break;
    case CorruptionKind::defocus_blur:
      out = defocus_blur_impl(image, p.at("radius") * scale);
      break;
    case CorruptionKind::glass_blur:
      out = glass_blur_impl(image, p.at("sigma") * scale,
                            std::max(1, static_cast<int>(std::lround(p.at("delta") * scale))),
                            static_cast<int>(p.at("iterations")), spec.seed);
      break;
    case CorruptionKind::motion_blur:
      out = motion_blur_impl(image, std::max(3.0, p.at("length") * scale), spec.seed);
      break;
    case CorruptionKind::zoom_blur:
      out = zoom_blur_impl(image, p.at("zoom_max"));
      break;
    case CorruptionKind::gaussian_blur:
      out = gaussian_blur_image(image, static_cast<float>(p.at("sigma") * scale));
      break;
    case CorruptionKind::snow:
      out = snow_impl(image, p.at("density"), std::max(3.0, p.at("flake_length") * scale),
                      p.at("whiten"), spec.seed);
      break;
    case CorruptionKind::frost:
      out = frost_impl(image, p.at("weight"), p.at("ridge_power"), spec.seed);
      break;
    case CorruptionKind::fog:
      out = fog_impl(image, p.at("weight"), p.at("roughness"), spec.seed);
      break;
    case CorruptionKind::brightness:
      out = brightness_impl(image, p.at("delta"));
      break;
    case CorruptionKind::spatter:
      out = spatter_impl(image, p.at("threshold"), p.at("opacity"), spec.seed);
      break;
    case CorruptionKind::contrast:
      out = contrast_impl(image, p.at("factor"));
      break;
    case CorruptionKind::elastic_transform:
      out = elastic_impl(image, p.at("amplitude") * scale, p.at("field_sigma") * scale / 4.0,
                         spec.seed);
      break;
    case CorruptionKind::pixelate:
      out = pixelate_impl(image, p.at("fraction"));
      break;
    case CorruptionKind::jpeg_compression:
      out = jpeg_impl(image, static_cast<int>(p.at("quality")));
      break;
    case CorruptionKind::saturate:
      out = saturate_impl(image, p.at("factor"), p.at("shift"));
      break;
  }
  clamp01(out);
  return out;
}

Tensor diamond_square(int size, double roughness, uint64_t seed) {
  if (size < 3 || ((size - 1) & (size - 2)) != 0) {
    throw ConfigError("diamond_square size must be 2^k+1, got " + std::to_string(size));
  }
  if (!(roughness > 0.0) || roughness > 1.0) {
    throw ConfigError("diamond_square roughness must be in (0,1], got " +
                      std::to_string(roughness));
  }
  const int n = size;
  Tensor field({n, n});
  auto at = [&](int y, int x) -> float& { return field.data[static_cast<size_t>(y) * n + x]; };

  CounterRng rng(CounterRng::derive(seed, 0x6473ULL));
  at(0, 0) = rng.next_float();
  at(0, n - 1) = rng.next_float();
  at(n - 1, 0) = rng.next_float();
  at(n - 1, n - 1) = rng.next_float();

  float amp = 0.5f * static_cast<float>(roughness);
  for (int step = n - 1; step >= 2; step /= 2) {
    const int half = step / 2;
    // diamond: square centers
    for (int y = half; y < n; y += step) {
      for (int x = half; x < n; x += step) {
        const float avg = (at(y - half, x - half) + at(y - half, x + half) +
                           at(y + half, x - half) + at(y + half, x + half)) *
                          0.25f;
        at(y, x) = avg + rng.uniform(-amp, amp);
      }
    }
    // square: edge midpoints (average of available axial neighbors)
    for (int y = 0; y < n; y += half) {
      const int x0 = (y / half) % 2 == 0 ? half : 0;
      for (int x = x0; x < n; x += step) {
        float acc = 0.0f;
        int cnt = 0;
        if (y - half >= 0) { acc += at(y - half, x); ++cnt; }
        if (y + half < n) { acc += at(y + half, x); ++cnt; }
        if (x - half >= 0) { acc += at(y, x - half); ++cnt; }
        if (x + half < n) { acc += at(y, x + half); ++cnt; }
        at(y, x) = acc / static_cast<float>(cnt) + rng.uniform(-amp, amp);
      }
    }
    amp *= static_cast<float>(roughness);
  }

  float lo = field.data[0], hi = field.data[0];
  for (float v : field.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi > lo) {
    const float inv = 1.0f / (hi - lo);
    for (auto& v : field.data) v = (v - lo) * inv;
  } else {
    std::fill(field.data.begin(), field.data.end(), 0.0f);
  }
  return field;
}

std::vector<ImageTensor> corrupt_dataset(const std::vector<ImageTensor>& images,
                                         CorruptionKind kind, int severity, uint64_t base_seed,
                                         int threads) {
  if (images.empty()) throw ConfigError("corrupt_dataset on empty image list");
  std::vector<ImageTensor> out(images.size());
  parallel_for(static_cast<int64_t>(images.size()), threads, [&](int64_t i) {
    try {
      const CorruptionSpec spec(kind, severity, CounterRng::derive(base_seed, static_cast<uint64_t>(i)));
      out[static_cast<size_t>(i)] = apply_corruption(images[static_cast<size_t>(i)], spec);
    } catch (const Error& e) {
      throw Error("image " + std::to_string(i) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace crobust
