#ifndef ETRIG_RNG_HPP
#define ETRIG_RNG_HPP

#include <cstdint>
#include <vector>

namespace etrig {

// Deterministic 64-bit generator (splitmix64). Every stochastic component of
// the toolkit draws from one of these so that a fixed seed reproduces runs
// bit-for-bit regardless of platform or standard-library version.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, n). Lemire's multiply-shift with rejection.
  uint32_t below(uint32_t n) {
    uint32_t x = static_cast<uint32_t>(next_u64() >> 32);
    uint64_t m = static_cast<uint64_t>(x) * n;
    uint32_t l = static_cast<uint32_t>(m);
    if (l < n) {
      uint32_t t = (0u - n) % n;
      while (l < t) {
        x = static_cast<uint32_t>(next_u64() >> 32);
        m = static_cast<uint64_t>(x) * n;
        l = static_cast<uint32_t>(m);
      }
    }
    return static_cast<uint32_t>(m >> 32);
  }

  // Uniform double in [0, 1).
  double real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * real(); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = below(static_cast<uint32_t>(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

}  // namespace etrig

#endif  // ETRIG_RNG_HPP
