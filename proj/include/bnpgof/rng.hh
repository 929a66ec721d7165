// Apache License, Version 2.0, refer to LICENSE.txt

// Counter-based random streams.
//
// A stream is identified by a master seed and a path of integers
// (replicate index, purpose tag, ...). The path is hashed into a Philox
// key, and the stream is Philox4x32-10 applied to an incrementing block
// counter, so a given (seed, path) produces the same numbers on every run
// and in every thread, with no jump-ahead bookkeeping.

#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

namespace bnpgof {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

// One Philox4x32-10 block.
Philox4x32Counter philox4x32(Philox4x32Counter counter, Philox4x32Key key);

std::uint64_t splitmix64(std::uint64_t x);

// Hash a seed and a path into a new 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> path);

class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed,
                     std::initializer_list<std::uint64_t> path = {});
  RngStream(std::uint64_t seed, std::span<const std::uint64_t> path);

  // Independent stream at path + {tag}; does not consume from this one.
  RngStream child(std::uint64_t tag) const;

  std::uint64_t seed() const { return seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  // [0, 1) with 53 random bits.
  double uniform();
  // (0, 1); never returns 0 so that log() is finite.
  double uniform_open();
  // floor(uniform() * n); always consumes exactly one 64-bit word.
  std::size_t index(std::size_t n);

  double normal();
  double exponential();
  // Gamma(shape, 1). Shape >= 1 uses Marsaglia-Tsang squeeze/rejection,
  // shape < 1 boosts from shape + 1.
  double gamma(double shape);
  // log of a Gamma(shape, 1) variate, finite even when the variate itself
  // would underflow (shape << 1).
  double log_gamma(double shape);

 private:
  void refill();

  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
  Philox4x32Key key_{};
  std::uint64_t stream_id_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

}  // namespace bnpgof
