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

#ifndef AWRS_ORACLE_HPP
#define AWRS_ORACLE_HPP

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include <awrs/categorical.hpp>
#include <awrs/constraints.hpp>
#include <awrs/toylm.hpp>

/**
 * \file
 * \brief Exact reference computations by exhaustive evaluation.
 *
 * These are deliberately slow. Samplers and SMC are tested against them.
 */

namespace awrs {

/// Local posterior prior(x) c(x) / z together with z.
struct LocalPosterior {
  Categorical post;
  double z = 0.0;
};

/// Evaluates `c` on every token of the vocabulary. Throws NoValidToken when z == 0.
[[nodiscard]] LocalPosterior token_mask(const Categorical& prior, const TokenConstraint& c);

/// A distribution over complete strings together with its normalizer.
class StringDistribution {
 public:
  StringDistribution() = default;
  StringDistribution(std::vector<WeightedString> entries, double normalizer);

  [[nodiscard]] const std::vector<WeightedString>& entries() const noexcept { return entries_; }
  /// Normalizing constant (G for posteriors).
  [[nodiscard]] double normalizer() const noexcept { return normalizer_; }
  [[nodiscard]] double prob(const TokenString& s) const;
  [[nodiscard]] std::map<TokenString, double> as_map() const;

 private:
  std::vector<WeightedString> entries_;
  std::map<TokenString, double> index_;
  double normalizer_ = 0.0;
};

using StringPredicate = std::function<bool(std::span<const Token>)>;

/// p(x) C(x) / G over the model's full support. Throws EmptyPosterior when G == 0.
[[nodiscard]] StringDistribution global_posterior(const ToyLM& lm, const StringPredicate& accepts);
[[nodiscard]] StringDistribution global_posterior(const ToyLM& lm, const TrieLanguage& lang);

struct LcdEntry {
  TokenString tokens;
  double prob = 0.0;    ///< probability under locally constrained decoding
  double weight = 0.0;  ///< product of the local normalizers along the path
};

/// Locally constrained decoding distribution by exhaustive expansion.
struct LcdDistribution {
  std::vector<LcdEntry> entries;
  /// Decoding mass that ends at a prefix where no valid token has positive mass.
  double dead_mass = 0.0;
};

[[nodiscard]] LcdDistribution lcd_distribution(const ToyLM& lm, const IncrementalConstraint& constraint);

/// KL(p || q) in nats; +inf if p is not absolutely continuous w.r.t. q.
[[nodiscard]] double kl_divergence(const Categorical& p, const Categorical& q);

/// Half the L1 distance between two (sub)probability maps.
template <class Key>
[[nodiscard]] double total_variation(const std::map<Key, double>& a, const std::map<Key, double>& b) {
  double sum = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      sum += std::abs(ia->second);
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      sum += std::abs(ib->second);
      ++ib;
    } else {
      sum += std::abs(ia->second - ib->second);
      ++ia;
      ++ib;
    }
  }
  return 0.5 * sum;
}

[[nodiscard]] double total_variation(std::span<const double> a, std::span<const double> b);

}  // namespace awrs

#endif
