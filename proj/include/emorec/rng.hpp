#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace emorec {

// SplitMix64 finalizer. Used to derive independent sub-seeds from one master
// seed and for stateless per-cell hashing.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Named sub-seed: derive_seed(s, "split") and derive_seed(s, "init") are
// decorrelated streams of the same master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view role) {
  return splitmix64(master ^ fnv1a64(role));
}

// Converts 64 random bits to a double in [0, 1) using the top 53 bits. The
// std distributions are implementation-defined, so all code with a
// reproducibility contract draws through this instead.
constexpr double bits_to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // [0, 1)
  double unit() { return bits_to_unit(next()); }

  // Unbiased draw from [0, n) by rejection.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

// Fisher-Yates with the portable draw above.
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.index(i));
    std::swap(values[i - 1], values[j]);
  }
}

// Stateless uniform [0, 1) for a (seed, a, b) triple.
inline double hash_unit(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(a + 0x9E3779B97F4A7C15ULL));
  h = splitmix64(h ^ splitmix64(b + 0xD1B54A32D192ED03ULL));
  return bits_to_unit(h);
}

}  // namespace emorec
