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

#ifndef AWRS_TOYLM_HPP
#define AWRS_TOYLM_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <awrs/categorical.hpp>
#include <awrs/vocabulary.hpp>

namespace awrs {

/// Small n-gram language model with a hard length cap.
/**
 * The next-token distribution depends on the last `order` tokens (fewer at
 * the start of a string). Every distribution covers the alphabet plus eos.
 * After `max_len` tokens the model emits eos with probability one, so the
 * support is finite and every quantity below is exactly computable.
 */
class ToyLM {
 public:
  ToyLM(Vocabulary vocab, std::size_t order, std::size_t max_len, std::map<TokenString, Categorical> tables);

  /// Two-symbol model with p(a)=0.9, p(a|a)=0.01, p(a|b)=0.99 and max_len 2.
  [[nodiscard]] static ToyLM two_symbol();

  /// JSON {"alphabet": [...], "k": k, "max_len": n, "tables": {"a b": [p..., p_eos], ...}};
  /// table keys are contexts written as space-separated symbols.
  [[nodiscard]] static ToyLM parse_json(std::string_view text);
  [[nodiscard]] static ToyLM load(const std::filesystem::path& path);
  [[nodiscard]] std::string to_json() const;

  [[nodiscard]] const Vocabulary& vocab() const noexcept { return vocab_; }
  [[nodiscard]] std::size_t vocab_size() const noexcept { return vocab_.size(); }
  [[nodiscard]] Token eos() const noexcept { return vocab_.eos(); }
  [[nodiscard]] std::size_t order() const noexcept { return order_; }
  [[nodiscard]] std::size_t max_len() const noexcept { return max_len_; }
  [[nodiscard]] const std::map<TokenString, Categorical>& tables() const noexcept { return tables_; }

  /// p(. | prefix) including eos. Point mass on eos at |prefix| == max_len.
  /// Throws PrefixTooLong past max_len.
  [[nodiscard]] const Categorical& next_dist(std::span<const Token> prefix) const;

  /// Probability of the complete string `s` (product of conditionals and the final eos term).
  [[nodiscard]] double string_prob(std::span<const Token> s) const;

  /// Probability that a sampled string starts with `prefix`.
  [[nodiscard]] double prefix_prob(std::span<const Token> prefix) const;

 private:
  Vocabulary vocab_;
  std::size_t order_;
  std::size_t max_len_;
  std::map<TokenString, Categorical> tables_;
  Categorical forced_eos_;
};

/// Dirichlet(1) conditionals for every context up to length `order`; deterministic in `seed`.
[[nodiscard]] ToyLM random_lm(std::uint64_t seed, std::size_t alphabet, std::size_t order, std::size_t max_len);

struct WeightedString {
  TokenString tokens;
  double prob = 0.0;
};

/// Every complete string with positive probability, in lexicographic DFS order.
/**
 * Refuses (EnumerationLimit) when max_len exceeds `kMaxEnumerationLength` or
 * the support would exceed `kMaxEnumerationStrings`.
 */
[[nodiscard]] std::vector<WeightedString> enumerate_support(const ToyLM& lm);

inline constexpr std::size_t kMaxEnumerationStrings = 100'000;
inline constexpr std::size_t kMaxEnumerationLength = 16;

}  // namespace awrs

#endif
