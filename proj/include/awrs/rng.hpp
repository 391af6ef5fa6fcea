// Copyright 2026 The awrs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AWRS_RNG_HPP
#define AWRS_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace awrs {

/// SplitMix64 finalizer; used to derive xoshiro state from (seed, stream).
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

/// Mixes several integers into one stream id.
constexpr std::uint64_t stream_id(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) noexcept {
  std::uint64_t s = a;
  std::uint64_t h = splitmix64(s);
  s = h ^ b;
  h = splitmix64(s);
  s = h ^ c;
  return splitmix64(s);
}

/// Splittable pseudo-random generator (xoshiro256** core).
/**
 * A generator is identified by a `(seed, stream)` pair. Identical pairs yield
 * bit-identical sequences, and `split` derives independent child streams so
 * that every sampler call, particle or experiment cell can own its own
 * reproducible stream. Satisfies UniformRandomBitGenerator.
 *
 * Not thread-safe; give each thread its own stream.
 */
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept : seed_{seed}, stream_{stream} {
    std::uint64_t s = seed ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    for (auto& word : state_) {
      word = splitmix64(s);
    }
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream() const noexcept { return stream_; }

  /// Child generator with the same seed and a stream derived from this one.
  [[nodiscard]] Rng split(std::uint64_t child) const noexcept { return Rng{seed_, stream_id(stream_, child)}; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17U;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11U) * 0x1.0p-53; }

  /// Uniform double in (0, 1].
  double uniform_open_zero() noexcept { return 1.0 - uniform(); }

  /// Exp(1) variate.
  double exponential() noexcept { return -std::log(uniform_open_zero()); }

  /// Number of failures before the first success when each trial fails with
  /// probability `fail_prob`. Returns the max value for `fail_prob >= 1`.
  std::uint64_t geometric_failures(double fail_prob) noexcept {
    if (fail_prob <= 0.0) {
      return 0;
    }
    if (fail_prob >= 1.0) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    const double draw = std::floor(std::log(uniform_open_zero()) / std::log(fail_prob));
    if (draw >= 1.8e19) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(draw);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace awrs

#endif
