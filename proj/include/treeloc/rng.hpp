#pragma once

#include <cstdint>

namespace treeloc {

namespace detail {
// 64-bit finalizer from SplitMix64 (Steele, Lea, Vigna).
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}
}  // namespace detail

// Counter-based generator: draw i of stream (seed, stream) is a pure function
// of (seed, stream, i). Every sample therefore lands on the same values no
// matter how work is split across threads, and streams never overlap in
// practice (distinct keys give unrelated 2^64-long counter sequences).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : key_(detail::mix64(seed ^ detail::mix64(stream + 0x9e3779b97f4a7c15ull))) {}

  std::uint64_t next_u64() {
    return detail::mix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ull);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace treeloc
