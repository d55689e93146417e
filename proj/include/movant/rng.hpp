#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

// Deterministic random helpers. std::mt19937_64 is fully specified by the
// standard, but the standard *distributions* are not, so the mappings from
// raw engine output to doubles live here and nowhere else. Every run with
// the same seed produces the same bits on any platform.

namespace movant::rng {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seed for sub-stream `stream` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ stream);
}

// Derives an independent engine for sub-stream `stream` of a master seed.
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  return Engine(derive_seed(seed, stream));
}

// Uniform in [0, 1) with 53 random bits.
inline double canonical(Engine& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& g, double lo, double hi) {
  return lo + (hi - lo) * canonical(g);
}

// Box-Muller pair of independent standard normals.
inline std::pair<double, double> gaussian_pair(Engine& g) {
  const double u1 = 1.0 - canonical(g);  // (0, 1], keeps the log finite
  const double u2 = canonical(g);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * 3.14159265358979323846 * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

inline double gaussian(Engine& g) { return gaussian_pair(g).first; }

// Circularly symmetric complex normal with unit variance per part.
inline std::complex<double> complex_gaussian(Engine& g) {
  const auto [re, im] = gaussian_pair(g);
  return {re, im};
}

// Fisher-Yates. The modulo bias is unmeasurable for n << 2^64 and, unlike
// std::shuffle, the permutation is identical on every implementation.
template <class T>
void shuffle(std::vector<T>& items, Engine& g) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(g() % i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace movant::rng
