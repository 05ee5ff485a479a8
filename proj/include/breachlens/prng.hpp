#ifndef BREACHLENS_PRNG_HPP
#define BREACHLENS_PRNG_HPP

#include <cstdint>
#include <vector>

#include "breachlens/special.hpp"

namespace breachlens {

// xoshiro256++ seeded through splitmix64. Every randomized step in the
// library (splits, SMOTE, bootstrap, permutation sampling) draws from this
// generator so runs reproduce bit-exactly across platforms; none of the
// distribution helpers delegate to <random>, whose outputs are
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), bound > 0; rejection keeps it unbiased.
  std::uint64_t uniform_int(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via the inverse CDF; one uniform per variate keeps the
  // stream layout easy to reason about.
  double gaussian() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return special::norm_ppf(u);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent child stream (used where stages need their own
  // generator without consuming the parent's sequence).
  Rng fork(std::uint64_t stream_id) {
    std::uint64_t mix = 0x9E3779B97F4A7C15ull;
    return Rng(next_seed_material() ^ (splitmix_once(stream_id) + mix));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    return splitmix_once(x);
  }

  static std::uint64_t splitmix_once(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t next_seed_material() { return next_u64(); }

  std::uint64_t state_[4] = {};
};

}  // namespace breachlens

#endif  // BREACHLENS_PRNG_HPP
