#include <doctest.h>

#include <cmath>
#include <set>

#include "crobust/augment.hpp"
#include "crobust/corruptions.hpp"
#include "crobust/errors.hpp"
#include "crobust/rng.hpp"

using namespace crobust;

namespace {

// Smooth colored test image: per-channel sinusoidal field, strictly inside
// (0,1) so additive corruptions always have room to move pixels.
ImageTensor probe_image(int h, int w, uint64_t seed) {
  CounterRng rng(seed);
  ImageTensor img(h, w);
  for (int c = 0; c < 3; ++c) {
    const float fy = rng.uniform(0.5f, 2.5f);
    const float fx = rng.uniform(0.5f, 2.5f);
    const float phase = rng.uniform(0.0f, 6.28f);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const float t = 6.2831853f * (fy * y / h + fx * x / w) + phase;
        img.at(c, y, x) = 0.5f + 0.35f * std::sin(t);
      }
    }
  }
  return img;
}

}  // namespace

TEST_CASE("corruption names, groups and arity") {
  CHECK(all_corruptions().size() == 19);
  std::set<std::string_view> names;
  int group_counts[4] = {0, 0, 0, 0};
  for (CorruptionKind k : all_corruptions()) {
    names.insert(corruption_name(k));
    CHECK(corruption_from_name(corruption_name(k)) == k);
    const std::string_view g = corruption_group(k);
    if (g == "Noise") ++group_counts[0];
    if (g == "Blur") ++group_counts[1];
    if (g == "Weather") ++group_counts[2];
    if (g == "Digital") ++group_counts[3];
  }
  CHECK(names.size() == 19);
  CHECK(group_counts[0] == 4);
  CHECK(group_counts[1] == 5);
  CHECK(group_counts[2] == 5);
  CHECK(group_counts[3] == 5);
  CHECK_FALSE(corruption_from_name("rainbow").has_value());
}

TEST_CASE("corruption spec validates severity at construction") {
  CHECK_THROWS_AS(CorruptionSpec(CorruptionKind::fog, 0, 1), ConfigError);
  CHECK_THROWS_AS(CorruptionSpec(CorruptionKind::fog, 6, 1), ConfigError);
  CHECK_NOTHROW(CorruptionSpec(CorruptionKind::fog, 5, 1));
}

TEST_CASE("severity_params: every cell is complete and key schedules are monotone") {
  for (CorruptionKind k : all_corruptions()) {
    const SeverityParams first = severity_params(k, 1);
    CHECK_FALSE(first.empty());
    for (int s = 2; s <= 5; ++s) {
      const SeverityParams p = severity_params(k, s);
      CHECK(p.size() == first.size());
      for (const auto& [key, val] : first) CHECK(p.count(key) == 1);
    }
  }

  for (int s = 1; s < 5; ++s) {
    CHECK(severity_params(CorruptionKind::jpeg_compression, s).at("quality") >
          severity_params(CorruptionKind::jpeg_compression, s + 1).at("quality"));
    CHECK(severity_params(CorruptionKind::gaussian_blur, s).at("sigma") <
          severity_params(CorruptionKind::gaussian_blur, s + 1).at("sigma"));
    CHECK(severity_params(CorruptionKind::shot_noise, s).at("photons") >
          severity_params(CorruptionKind::shot_noise, s + 1).at("photons"));
  }
}

TEST_CASE("severity tables dump is valid JSON text with all 19 kinds") {
  const std::string doc = severity_tables_json();
  for (CorruptionKind k : all_corruptions()) {
    CHECK(doc.find(std::string("\"") + std::string(corruption_name(k)) + "\"") !=
          std::string::npos);
  }
}

TEST_CASE("contrast on constant mid-gray is a fixed point at every severity") {
  ImageTensor gray(16, 16);
  std::fill(gray.data.begin(), gray.data.end(), 0.5f);
  for (int s = 1; s <= 5; ++s) {
    ImageTensor out = apply_corruption(gray, CorruptionSpec(CorruptionKind::contrast, s, 7));
    CHECK(bit_equal(out, gray));
  }
}

TEST_CASE("gaussian noise: seed determinism and severity RMS ladder") {
  ImageTensor img = probe_image(32, 32, 3);
  ImageTensor a = apply_corruption(img, CorruptionSpec(CorruptionKind::gaussian_noise, 3, 42));
  ImageTensor b = apply_corruption(img, CorruptionSpec(CorruptionKind::gaussian_noise, 3, 42));
  ImageTensor c = apply_corruption(img, CorruptionSpec(CorruptionKind::gaussian_noise, 3, 43));
  CHECK(bit_equal(a, b));
  CHECK_FALSE(bit_equal(a, c));

  double prev = 0.0;
  for (int s = 1; s <= 5; ++s) {
    ImageTensor out = apply_corruption(img, CorruptionSpec(CorruptionKind::gaussian_noise, s, 42));
    const double rms = rms_deviation(out, img);
    CHECK(rms > prev);
    prev = rms;
  }
}

TEST_CASE("noise+blur kinds: distortion strictly increases with severity (8-image probe)") {
  const CorruptionKind ladder_kinds[] = {
      CorruptionKind::gaussian_noise, CorruptionKind::shot_noise, CorruptionKind::impulse_noise,
      CorruptionKind::speckle_noise,  CorruptionKind::defocus_blur, CorruptionKind::glass_blur,
      CorruptionKind::motion_blur,    CorruptionKind::zoom_blur,    CorruptionKind::gaussian_blur};
  std::vector<ImageTensor> probes;
  for (uint64_t i = 0; i < 8; ++i) probes.push_back(probe_image(32, 32, 100 + i));

  for (CorruptionKind k : ladder_kinds) {
    CAPTURE(corruption_name(k));
    double prev = -1.0;
    for (int s = 1; s <= 5; ++s) {
      double acc = 0.0;
      for (size_t i = 0; i < probes.size(); ++i) {
        ImageTensor out =
            apply_corruption(probes[i], CorruptionSpec(k, s, CounterRng::derive(7, i)));
        acc += mean_abs_deviation(out, probes[i]);
      }
      CHECK(acc / probes.size() > prev);
      prev = acc / probes.size();
    }
  }
}

TEST_CASE("all kinds/severities: range, shape, determinism and non-degeneracy") {
  ImageTensor img = probe_image(32, 24, 5);  // non-square on purpose
  for (CorruptionKind k : all_corruptions()) {
    CAPTURE(corruption_name(k));
    for (int s = 1; s <= 5; ++s) {
      const CorruptionSpec spec(k, s, 11);
      ImageTensor out = apply_corruption(img, spec);
      CHECK(out.height == img.height);
      CHECK(out.width == img.width);
      CHECK(in_unit_range(out));
      CHECK(bit_equal(out, apply_corruption(img, spec)));
      CHECK_FALSE(bit_equal(out, img));  // non-degeneracy
    }
  }
}

TEST_CASE("blur and elastic kinds reject tiny images") {
  ImageTensor tiny(4, 4);
  std::fill(tiny.data.begin(), tiny.data.end(), 0.5f);
  for (CorruptionKind k :
       {CorruptionKind::defocus_blur, CorruptionKind::glass_blur, CorruptionKind::motion_blur,
        CorruptionKind::zoom_blur, CorruptionKind::gaussian_blur,
        CorruptionKind::elastic_transform}) {
    CHECK_THROWS_AS(apply_corruption(tiny, CorruptionSpec(k, 3, 1)), ConfigError);
  }
  // noise kinds still work at this size
  CHECK_NOTHROW(apply_corruption(tiny, CorruptionSpec(CorruptionKind::gaussian_noise, 3, 1)));
}

TEST_CASE("diamond_square contract") {
  CHECK_THROWS_AS(diamond_square(16, 0.5, 1), ConfigError);   // not 2^k+1
  CHECK_THROWS_AS(diamond_square(17, 0.0, 1), ConfigError);   // roughness out of range
  CHECK_THROWS_AS(diamond_square(17, 1.5, 1), ConfigError);

  Tensor a = diamond_square(33, 0.6, 9);
  Tensor b = diamond_square(33, 0.6, 9);
  CHECK(bit_equal(a, b));
  CHECK_FALSE(bit_equal(a, diamond_square(33, 0.6, 10)));

  float lo = 1.0f, hi = 0.0f;
  for (float v : a.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo == 0.0f);
  CHECK(hi == 1.0f);
}

TEST_CASE("diamond_square roughness -> 0 leaves only the corner interpolation") {
  // with vanishing roughness the displacement noise disappears, so two tiny
  // roughness values (same seed, same corner draws) give almost equal fields
  Tensor a = diamond_square(33, 1e-6, 4);
  Tensor b = diamond_square(33, 1e-4, 4);
  CHECK(max_abs_diff(a, b) < 1e-3f);
}

TEST_CASE("corrupt_dataset: batch semantics") {
  std::vector<ImageTensor> images;
  for (uint64_t i = 0; i < 6; ++i) images.push_back(probe_image(16, 16, 200 + i));

  SUBCASE("singleton equals direct apply with the derived seed") {
    auto one = corrupt_dataset({images[0]}, CorruptionKind::gaussian_noise, 2, 77);
    ImageTensor direct = apply_corruption(
        images[0], CorruptionSpec(CorruptionKind::gaussian_noise, 2, CounterRng::derive(77, 0)));
    CHECK(bit_equal(one[0], direct));
  }

  SUBCASE("parallel run bit-equals sequential run") {
    auto seq = corrupt_dataset(images, CorruptionKind::fog, 4, 5, 1);
    auto par = corrupt_dataset(images, CorruptionKind::fog, 4, 5, 4);
    REQUIRE(seq.size() == par.size());
    for (size_t i = 0; i < seq.size(); ++i) CHECK(bit_equal(seq[i], par[i]));
  }

  SUBCASE("permuting inputs permutes outputs identically") {
    auto fwd = corrupt_dataset(images, CorruptionKind::contrast, 3, 9);
    std::vector<ImageTensor> reversed(images.rbegin(), images.rend());
    auto rev = corrupt_dataset(reversed, CorruptionKind::contrast, 3, 9);
    // seed follows the position, so compare against the position-matched run
    CHECK(bit_equal(rev[0], apply_corruption(images[5], CorruptionSpec(CorruptionKind::contrast,
                                                                       3, CounterRng::derive(9, 0)))));
    CHECK(bit_equal(fwd[0], apply_corruption(images[0], CorruptionSpec(CorruptionKind::contrast,
                                                                       3, CounterRng::derive(9, 0)))));
  }

  SUBCASE("per-image errors carry the offending index") {
    std::vector<ImageTensor> mixed = images;
    mixed[3] = ImageTensor(4, 4);  // too small for blur
    try {
      corrupt_dataset(mixed, CorruptionKind::zoom_blur, 1, 3);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("image 3") != std::string::npos);
    }
  }

  SUBCASE("empty list is rejected") {
    CHECK_THROWS_AS(corrupt_dataset({}, CorruptionKind::fog, 1, 1), ConfigError);
  }
}

TEST_CASE("augment_pair basics") {
  ImageTensor img = probe_image(32, 32, 50);

  SUBCASE("flip prob 1, crop 1, no color distortion is the exact mirror") {
    AugmentationSpec spec;
    spec.crop_min = spec.crop_max = 1.0f;
    spec.flip_prob = 1.0f;
    spec.color_strength = 0.0f;
    spec.gray_prob = 0.0f;
    spec.seed = 4;
    auto [a, b] = augment_pair(img, spec);
    CHECK(bit_equal(a, hflip(img)));
    CHECK(bit_equal(b, hflip(img)));
  }

  SUBCASE("same seed reproduces the pair bit-exactly") {
    AugmentationSpec spec;
    spec.seed = 21;
    auto [a1, b1] = augment_pair(img, spec);
    auto [a2, b2] = augment_pair(img, spec);
    CHECK(bit_equal(a1, a2));
    CHECK(bit_equal(b1, b2));
    CHECK_FALSE(bit_equal(a1, b1));  // the two views are independent draws
  }

  SUBCASE("grayscale prob 1 equalizes channels") {
    AugmentationSpec spec;
    spec.gray_prob = 1.0f;
    spec.seed = 8;
    auto [a, b] = augment_pair(img, spec);
    for (int y = 0; y < a.height; ++y) {
      for (int x = 0; x < a.width; ++x) {
        CHECK(a.at(0, y, x) == a.at(1, y, x));
        CHECK(a.at(1, y, x) == a.at(2, y, x));
      }
    }
  }

  SUBCASE("shape preserved under cropping") {
    AugmentationSpec spec;
    spec.crop_min = 0.5f;
    spec.crop_max = 0.7f;
    spec.seed = 2;
    auto [a, b] = augment_pair(img, spec);
    CHECK(a.height == 32);
    CHECK(b.width == 32);
    CHECK(in_unit_range(a));
    CHECK(in_unit_range(b));
  }

  SUBCASE("invalid spec is rejected") {
    AugmentationSpec spec;
    spec.crop_min = 0.0f;
    CHECK_THROWS_AS(augment_draw(img, spec, 0), ConfigError);
    spec.crop_min = 0.8f;
    spec.flip_prob = 1.5f;
    CHECK_THROWS_AS(augment_draw(img, spec, 0), ConfigError);
  }
}
