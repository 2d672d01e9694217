#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace denseleaf {

//! Deterministic counter-based random stream (SplitMix64 core).
//!
//! All sampling in the library goes through this generator so that results
//! are reproducible from a 64-bit seed alone, independent of the standard
//! library's distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  //! Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  //! Uniform double in (0, 1]; never returns 0 (safe for log()).
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  //! Standard normal via Box-Muller; the second value of each pair is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  //! Poisson draw by exponential interarrival times. O(lambda).
  long poisson(double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("poisson: lambda < 0");
    long k = 0;
    double acc = 0.0;
    while (true) {
      acc -= std::log(uniform_pos());
      if (acc > lambda) return k;
      ++k;
    }
  }

  //! Index in [0, weights_size) with probability proportional to weights.
  //! Weights must be nonnegative and sum to something positive.
  template <typename Container>
  std::size_t categorical(const Container& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    std::size_t i = 0;
    const std::size_t last = weights.size() - 1;
    for (double w : weights) {
      if (u < w || i == last) return i;
      u -= w;
      ++i;
    }
    return last;
  }

private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

//! Mixes an extra 64-bit word into a seed (order-sensitive, deterministic).
inline std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t word) {
  std::uint64_t z = seed ^ (word + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

//! FNV-1a over a string, for mixing textual tags into seeds.
inline std::uint64_t seed_mix(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return seed_mix(seed, h);
}

}  // namespace denseleaf
