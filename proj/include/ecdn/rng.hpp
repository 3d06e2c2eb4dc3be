#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace ecdn {

// Seeded random stream with hand-rolled variate transforms so that draw
// sequences are pinned to the engine output, not to libstdc++ distribution
// internals. Every consumed 64-bit word is folded into a running digest,
// which lets the harness verify common-random-numbers discipline.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() {
    uint64_t v = gen_();
    absorb(v);
    return v;
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound).
  int uniform_int(int bound) {
    if (bound <= 0) throw std::invalid_argument("uniform_int: bound must be positive");
    return static_cast<int>(next_u64() % static_cast<uint64_t>(bound));
  }

  double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Knuth's product method; fine for the modest rates used here.
  int poisson(double mean) {
    if (mean < 0) throw std::invalid_argument("poisson: mean must be nonnegative");
    if (mean == 0) return 0;
    double limit = std::exp(-mean);
    double prod = 1.0;
    int count = -1;
    do {
      prod *= uniform01();
      ++count;
    } while (prod > limit);
    return count;
  }

  uint64_t digest() const { return digest_; }

 private:
  void absorb(uint64_t v) {
    // FNV-1a over the eight bytes.
    for (int i = 0; i < 8; ++i) {
      digest_ ^= (v >> (8 * i)) & 0xffu;
      digest_ *= 1099511628211ull;
    }
  }

  std::mt19937_64 gen_;
  uint64_t digest_ = 14695981039346656037ull;
};

// Derives a substream seed from a master seed and a stream name, so that
// independent processes (mobility, requests, arrivals, ...) can be replayed
// in isolation.
inline uint64_t derive_seed(uint64_t master, std::string_view stream_name) {
  uint64_t h = 14695981039346656037ull;
  for (char c : stream_name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  h ^= master + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  // splitmix64 finalizer
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebull;
  h ^= h >> 31;
  return h;
}

}  // namespace ecdn
