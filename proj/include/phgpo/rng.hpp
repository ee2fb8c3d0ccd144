#pragma once

// Deterministic randomness utilities. Every stochastic component draws from an
// mt19937_64 stream derived from (run seed, purpose tag, counters) so results
// are reproducible across platforms and independent of evaluation order.
// Distribution helpers are hand-rolled: std::uniform_*_distribution output is
// implementation defined, the raw engine output is not.

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace phgpo {

// FNV-1a, 64 bit. Used for embedding buckets and simulator content hashing.
inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// splitmix64 finalizer; good avalanche for combining seed material.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(a) ^ b);
}

// Named substream: seed ^ tag ^ counters, avalanched.
inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed, fnv1a64(tag));
  h = mix64(h, a);
  h = mix64(h, b);
  h = mix64(h, c);
  return h;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Modulo bias is ~n/2^64, irrelevant at this scale.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

// Draw an index from unnormalized nonnegative weights.
inline std::size_t categorical(std::mt19937_64& rng,
                               const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform_double(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;  // guard against rounding at the top end
}

template <typename T>
void shuffle_inplace(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace phgpo
