#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace crobust {

namespace detail {

inline uint64_t splitmix64_mix(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based generator (splitmix64). Every consumer derives its own key
// from named inputs, so parallel and sequential execution draw identical
// streams and skipping a stream never shifts another one.
class CounterRng {
 public:
  explicit CounterRng(uint64_t key) : state_(key) {}

  static uint64_t derive(uint64_t a, uint64_t b) {
    return detail::splitmix64_mix(a + 0x9e3779b97f4a7c15ULL * (b + 1));
  }
  static uint64_t derive(uint64_t a, uint64_t b, uint64_t c) {
    return derive(derive(a, b), c);
  }
  static uint64_t derive(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    return derive(derive(a, b, c), d);
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return detail::splitmix64_mix(state_);
  }

  // Uniform in [0, 1) with 24 bits of mantissa.
  float next_float() {
    return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
  }

  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  float uniform(float lo, float hi) { return lo + (hi - lo) * next_float(); }

  // Standard normal via Box-Muller; the pair's second value is cached.
  float normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    float u1 = next_float();
    float u2 = next_float();
    if (u1 < 1e-12f) u1 = 1e-12f;
    const float r = std::sqrt(-2.0f * std::log(u1));
    const float t = 6.2831853071795864769f * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

  bool bernoulli(float p) { return next_float() < p; }

  // Deterministic Poisson draw: Knuth's product method for small means,
  // rounded normal approximation for large ones.
  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 30.0) {
      const double limit = std::exp(-lambda);
      double prod = 1.0;
      int k = -1;
      do {
        ++k;
        prod *= next_double();
      } while (prod > limit);
      return k;
    }
    const double g = static_cast<double>(normal());
    const double v = lambda + std::sqrt(lambda) * g;
    return v < 0.0 ? 0 : static_cast<int>(std::lround(v));
  }

 private:
  uint64_t state_;
  float spare_ = 0.0f;
  bool have_spare_ = false;
};

// Stable 64-bit hash for strings (FNV-1a), used to key parameter init streams.
inline uint64_t fnv1a64(const char* data, size_t n) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

}  // namespace crobust
