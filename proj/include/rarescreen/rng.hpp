#pragma once

#include <cstdint>
#include <random>
#include <vector>

// Deterministic randomness helpers. std::mt19937_64 output is pinned by the
// standard, but the std distributions are not, so bounded draws and unit
// uniforms are implemented here. Every seeded computation in the library
// must draw through these helpers.
namespace rarescreen::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of independent substream `stream` of master seed `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream = 0) {
  return splitmix64(splitmix64(seed) ^ stream);
}

// Engine over that substream.
inline std::mt19937_64 engine(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(derive_seed(seed, stream));
}

// Unbiased draw in [0, n) by rejection.
inline std::uint64_t below(std::mt19937_64& g, std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t draw;
  do {
    draw = g();
  } while (draw >= limit);
  return draw % n;
}

// Uniform in [0, 1) with 53-bit resolution.
inline double unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(below(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

// k distinct values from [0, n), order given by the partial Fisher-Yates walk.
inline std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n,
                                                             std::uint32_t k,
                                                             std::mt19937_64& g) {
  std::vector<std::uint32_t> pool(n);
  for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
  if (k > n) k = n;
  for (std::uint32_t i = 0; i < k; ++i) {
    std::uint32_t j = i + static_cast<std::uint32_t>(below(g, n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace rarescreen::rng
