#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <utility>

namespace ift {

// SplitMix64 finaliser. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives a stream key from a seed and a tuple of integer coordinates.
inline std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t k = mix64(seed ^ 0x6A09E667F3BCC909ULL);
  for (auto c : coords) k = mix64(k ^ mix64(c + 0x9E3779B97F4A7C15ULL));
  return k;
}

// Counter-based SplitMix64 stream. The n-th draw depends only on (key, n), so
// draws can be addressed directly and parallel consumers never share state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

  static std::uint64_t at(std::uint64_t key, std::uint64_t n) {
    return mix64(key + (n + 1) * 0x9E3779B97F4A7C15ULL);
  }
  static double uniform_at(std::uint64_t key, std::uint64_t n) {
    return static_cast<double>(at(key, n) >> 11) * 0x1.0p-53;
  }

  std::uint64_t next() { return at(key_, counter_++); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), multiply-shift reduction.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Standard normal via Box-Muller; consumes two draws.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t k = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[k]);
    }
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace ift
