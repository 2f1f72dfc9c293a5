#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace dmsim {

// 64-bit FNV-1a over a tag string.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// splitmix64 finalizer; used to spread seed material.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// A seeded random stream. All draw helpers are built directly on the raw
// 64-bit output with fixed bit-level constructions, so sequences are
// identical across platforms and standard libraries (std::uniform_*
// distributions make no such promise).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1), 53 random bits.
  double uniform_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform index in [0, n); n must be positive. Multiply-shift reduction;
  // the modulo bias is at most n / 2^64 and irrelevant at our scales.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform_real() < p; }

  // Log-uniform on [lo, hi], lo > 0.
  double log_uniform(double lo, double hi) {
    const double u = uniform_real();
    return std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
  }

  // Knuth's product method; fine for the small means used here.
  long poisson(double mean) {
    const double limit = std::exp(-mean);
    long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform_real();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::mt19937_64 gen_;
};

// Derives the seed of a sub-stream from the master seed, a purpose tag and
// up to two indices (typically agent number and step). Equal inputs give
// equal streams; this is what makes policy calls replayable and order-free.
inline RngStream derive_stream(std::uint64_t master, std::string_view tag,
                               std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = mix64(master ^ fnv1a64(tag));
  h = mix64(h ^ (a + 0x9e3779b97f4a7c15ull));
  h = mix64(h ^ (b + 0x7f4a7c159e3779b9ull));
  return RngStream(h);
}

}  // namespace dmsim
