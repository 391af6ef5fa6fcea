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

#include <awrs/oracle.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>

#include <awrs/errors.hpp>
#include <awrs/numeric.hpp>

namespace awrs {

LocalPosterior token_mask(const Categorical& prior, const TokenConstraint& c) {
  const auto probs = prior.probs();
  std::vector<double> masked(probs.size(), 0.0);
  CompensatedSum z;
  for (Token t = 0; t < probs.size(); ++t) {
    if (c(t)) {
      masked[t] = probs[t];
      z += probs[t];
    }
  }
  if (z.value() <= 0.0) {
    throw NoValidToken("token_mask: no valid token has positive mass");
  }
  return LocalPosterior{normalize(masked), z.value()};
}

StringDistribution::StringDistribution(std::vector<WeightedString> entries, double normalizer)
    : entries_{std::move(entries)}, normalizer_{normalizer} {
  for (const auto& e : entries_) {
    index_[e.tokens] += e.prob;
  }
}

double StringDistribution::prob(const TokenString& s) const {
  const auto it = index_.find(s);
  return it == index_.end() ? 0.0 : it->second;
}

std::map<TokenString, double> StringDistribution::as_map() const { return index_; }

StringDistribution global_posterior(const ToyLM& lm, const StringPredicate& accepts) {
  auto support = enumerate_support(lm);
  std::vector<WeightedString> kept;
  CompensatedSum g;
  for (auto& entry : support) {
    if (accepts(entry.tokens)) {
      g += entry.prob;
      kept.push_back(std::move(entry));
    }
  }
  if (g.value() <= 0.0) {
    throw EmptyPosterior("no string in the model support satisfies the constraint");
  }
  for (auto& entry : kept) {
    entry.prob /= g.value();
  }
  return StringDistribution{std::move(kept), g.value()};
}

StringDistribution global_posterior(const ToyLM& lm, const TrieLanguage& lang) {
  return global_posterior(lm, [&lang](std::span<const Token> s) { return lang.contains(s); });
}

LcdDistribution lcd_distribution(const ToyLM& lm, const IncrementalConstraint& constraint) {
  if (lm.max_len() > kMaxEnumerationLength) {
    throw EnumerationLimit("enumeration refuses max_len > " + std::to_string(kMaxEnumerationLength));
  }
  LcdDistribution out;
  CompensatedSum dead;
  TokenString prefix;
  const Token eos = lm.eos();
  std::function<void(double, double)> visit = [&](double path_prob, double path_weight) {
    std::optional<LocalPosterior> found;
    try {
      found.emplace(token_mask(lm.next_dist(prefix), constraint.at(prefix)));
    } catch (const NoValidToken&) {
      dead += path_prob;
      return;
    }
    const LocalPosterior& local = *found;
    const double weight = path_weight * local.z;
    for (Token t = 0; t < local.post.vocab_size(); ++t) {
      const double p = local.post[t];
      if (p == 0.0) {
        continue;
      }
      if (t == eos) {
        if (out.entries.size() >= kMaxEnumerationStrings) {
          throw EnumerationLimit("decoding support exceeds " + std::to_string(kMaxEnumerationStrings) + " strings");
        }
        out.entries.push_back({prefix, path_prob * p, weight});
      } else {
        prefix.push_back(t);
        visit(path_prob * p, weight);
        prefix.pop_back();
      }
    }
  };
  visit(1.0, 1.0);
  out.dead_mass = dead.value();
  return out;
}

double kl_divergence(const Categorical& p, const Categorical& q) {
  if (p.vocab_size() != q.vocab_size()) {
    throw std::invalid_argument("kl_divergence: size mismatch");
  }
  CompensatedSum kl;
  for (Token t = 0; t < p.vocab_size(); ++t) {
    if (p[t] == 0.0) {
      continue;
    }
    if (q[t] == 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    kl += p[t] * std::log(p[t] / q[t]);
  }
  return kl.value();
}

double total_variation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("total_variation: size mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += std::abs(a[i] - b[i]);
  }
  return 0.5 * sum;
}

}  // namespace awrs
