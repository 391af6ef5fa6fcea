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

#ifndef AWRS_CATEGORICAL_HPP
#define AWRS_CATEGORICAL_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <awrs/rng.hpp>

/**
 * \file
 * \brief Dense categorical distributions over a token vocabulary.
 */

namespace awrs {

using Token = std::uint32_t;
using TokenString = std::vector<Token>;

/// Immutable normalized probability vector with a cached cumulative table.
/**
 * Zero-probability entries are legal and are never returned by `sample`.
 * Construct through `normalize` or `Categorical::point_mass`.
 */
class Categorical {
 public:
  [[nodiscard]] static Categorical point_mass(std::size_t vocab_size, Token token);

  [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
  [[nodiscard]] double operator[](Token token) const noexcept { return probs_[token]; }
  [[nodiscard]] std::size_t vocab_size() const noexcept { return probs_.size(); }
  /// Inclusive running sums of `probs()`.
  [[nodiscard]] std::span<const double> cdf() const noexcept { return cdf_; }
  /// Number of tokens with strictly positive probability.
  [[nodiscard]] std::size_t support_size() const noexcept { return support_size_; }

  /// Exact draw by inverse CDF (binary search).
  [[nodiscard]] Token sample(Rng& rng) const;

  friend bool operator==(const Categorical& a, const Categorical& b) noexcept { return a.probs_ == b.probs_; }

 private:
  friend Categorical normalize(std::span<const double> weights);
  explicit Categorical(std::vector<double> probs);

  std::vector<double> probs_;
  std::vector<double> cdf_;
  std::size_t support_size_ = 0;
  Token last_positive_ = 0;
};

/// Scales non-negative weights to sum to one. Throws AllZeroMass.
[[nodiscard]] Categorical normalize(std::span<const double> weights);

[[nodiscard]] inline Token sample(const Categorical& dist, Rng& rng) { return dist.sample(rng); }

/// A random order of the vocabulary plus the per-token keys that produced it.
struct KeyedOrdering {
  std::vector<Token> order;  ///< token ids, ascending by key
  std::vector<double> keys;  ///< indexed by token id; +inf for zero-mass tokens
};

/// Exponential-race keys: key_x ~ Exp(p(x)), order ascending.
/**
 * Walking `order` front to back is distributed exactly as sequential sampling
 * without replacement from `dist`. Zero-mass tokens sort last with key +inf.
 */
[[nodiscard]] KeyedOrdering swor_keys(const Categorical& dist, Rng& rng);

/// Zeroes `removed` and rescales the survivors. Throws AllZeroMass if nothing survives.
[[nodiscard]] Categorical remove_renormalize(const Categorical& dist, std::span<const Token> removed);

}  // namespace awrs

#endif
