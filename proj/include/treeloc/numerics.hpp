#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace treeloc {

inline constexpr std::string_view kVersion = "0.1.0";

// Pairwise (cascade) summation: O(eps * log n) error, and — unlike a running
// sum split across threads — the result depends only on the element order,
// never on how the work was chunked.
inline double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n <= 8) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

// FNV-1a 64-bit hash; used to fingerprint canonicalized configs.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace treeloc
