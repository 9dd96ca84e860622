#ifndef SMONEY_RNG_HPP
#define SMONEY_RNG_HPP

#include <cmath>
#include <cstdint>

namespace smoney {

// splitmix64 mixing step (Steele, Lea & Flood). Used to derive stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256++ (Blackman & Vigna, public domain). Cheap to construct, so one
// independent stream per pulse / per run is affordable. Output sequence is
// fixed by the seed, independent of platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  // Stream keyed by (seed, index): order-independent parallel generation.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t sm = seed;
    std::uint64_t a = splitmix64(sm);
    sm = a ^ (index * 0xD2B74407B1CE6E93ULL + 0x9E3779B97F4A7C15ULL);
    return Rng(splitmix64(sm));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  int uniform_bit() { return static_cast<int>(next_u64() >> 63); }

  // Inversion by sequential search; exact for the small means used here.
  // Truncated at kPoissonCap with the tail mass folded into the cap.
  int poisson(double mu) {
    if (mu <= 0.0) return 0;
    double threshold = uniform();
    double p = std::exp(-mu);
    double cdf = p;
    int k = 0;
    while (threshold > cdf && k < kPoissonCap) {
      ++k;
      p *= mu / k;
      cdf += p;
    }
    return k;
  }

  static constexpr int kPoissonCap = 50;

 private:
  explicit Rng() = default;

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4]{};
};

}  // namespace smoney

#endif
