#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lrgae {

// Seedable random stream. All randomness in the engine flows through
// explicitly passed Rng instances; there is no global generator. The
// uniform/normal transforms are hand-rolled on top of mt19937_64 so that
// a given seed produces the same sequence on every platform, which the
// determinism guarantees rely on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller (cached spare value).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
  }

  // Derives an independent child stream. Streams for distinct purposes
  // (augmentation, negative sampling, dropout, ...) are forked from the
  // run seed with distinct tags so that adding a consumer does not
  // perturb the draws seen by another.
  Rng fork(std::uint64_t tag) const {
    return Rng(mix(seed_base_ ^ (0x9e3779b97f4a7c15ULL * (tag + 1))));
  }

  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer.
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  explicit Rng(std::uint64_t seed, int) : engine_(seed) {}

  std::mt19937_64 engine_;
  std::uint64_t seed_base_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;

 public:
  // Named construction that remembers the base seed, enabling fork().
  static Rng seeded(std::uint64_t seed) {
    Rng r(seed);
    r.seed_base_ = seed;
    return r;
  }
};

// Well-known stream tags, used with Rng::fork.
namespace stream {
inline constexpr std::uint64_t kParamInit = 1;
inline constexpr std::uint64_t kAugmentA = 2;
inline constexpr std::uint64_t kAugmentB = 3;
inline constexpr std::uint64_t kNegatives = 4;
inline constexpr std::uint64_t kDropout = 5;
inline constexpr std::uint64_t kSplit = 6;
inline constexpr std::uint64_t kProbe = 7;
inline constexpr std::uint64_t kCluster = 8;
}  // namespace stream

}  // namespace lrgae
