#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace wordrec {

// splitmix64 finalizer; used to derive well-separated child seeds.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t tag) {
  return mix64(seed ^ mix64(tag));
}

inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
  return mix64(mix_seed(seed, a) ^ mix64(b + 0x2545f4914f6cdd1dULL));
}

// Stream tags so independent consumers of one master seed never share a
// derived seed: Rng(mix_seed(seed, tag)) or mix_seed(seed, tag_base + i, j).
namespace seed_stream {
constexpr uint64_t kParamInit = 1;
constexpr uint64_t kShuffle = 2;
constexpr uint64_t kDropout = 3;
constexpr uint64_t kFoldDeal = 4;
}  // namespace seed_stream

// Deterministic PRNG. The engine is mt19937_64 (its output sequence is pinned
// by the standard); all draw transforms are our own so that results do not
// depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next() { return eng_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // [0, n); modulo bias is ~n/2^64, irrelevant at our sizes
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }

  // Fisher-Yates
  template <class T>
  void shuffle(std::vector<T>& xs) {
    for (size_t i = xs.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace wordrec
