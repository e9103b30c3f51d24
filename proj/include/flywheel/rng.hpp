#pragma once

// xoshiro256++ with jump-ahead; a UniformRandomBitGenerator for <random>.

#include <array>
#include <cstdint>
#include <limits>

namespace flywheel {

/// splitmix64 step, used to expand seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Independent, reproducible stream seed for item `index` of a run seeded with `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed = 1);
  static Xoshiro256pp from_state(const std::array<std::uint64_t, 4>& state) {
    Xoshiro256pp g;
    g.s_ = state;
    return g;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
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

  /// Advances by 2^128 draws; successive jumps give non-overlapping streams.
  void jump();

  const std::array<std::uint64_t, 4>& state() const { return s_; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace flywheel
