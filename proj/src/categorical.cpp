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

#include <awrs/categorical.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <awrs/errors.hpp>
#include <awrs/numeric.hpp>

namespace awrs {

Categorical::Categorical(std::vector<double> probs) : probs_{std::move(probs)}, cdf_(probs_.size()) {
  CompensatedSum running;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    running += probs_[i];
    cdf_[i] = running.value();
    if (probs_[i] > 0.0) {
      ++support_size_;
      last_positive_ = static_cast<Token>(i);
    }
  }
}

Categorical Categorical::point_mass(std::size_t vocab_size, Token token) {
  if (token >= vocab_size) {
    throw std::out_of_range("point_mass token outside vocabulary");
  }
  std::vector<double> probs(vocab_size, 0.0);
  probs[token] = 1.0;
  return Categorical{std::move(probs)};
}

Token Categorical::sample(Rng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) {
    return last_positive_;
  }
  return static_cast<Token>(it - cdf_.begin());
}

Categorical normalize(std::span<const double> weights) {
  if (weights.empty()) {
    throw AllZeroMass("normalize: empty weight vector");
  }
  for (const double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("normalize: weights must be finite and non-negative");
    }
  }
  const double total = compensated_sum(weights);
  if (total <= 0.0) {
    throw AllZeroMass("normalize: every weight is zero");
  }
  std::vector<double> probs(weights.begin(), weights.end());
  for (double& p : probs) {
    p /= total;
  }
  return Categorical{std::move(probs)};
}

KeyedOrdering swor_keys(const Categorical& dist, Rng& rng) {
  const auto probs = dist.probs();
  KeyedOrdering result;
  result.keys.resize(probs.size());
  result.order.resize(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    // One draw per token regardless of mass keeps the stream layout fixed.
    const double e = rng.exponential();
    result.keys[i] = probs[i] > 0.0 ? e / probs[i] : std::numeric_limits<double>::infinity();
  }
  std::iota(result.order.begin(), result.order.end(), Token{0});
  std::stable_sort(result.order.begin(), result.order.end(),
                   [&](Token a, Token b) { return result.keys[a] < result.keys[b]; });
  return result;
}

Categorical remove_renormalize(const Categorical& dist, std::span<const Token> removed) {
  std::vector<double> weights(dist.probs().begin(), dist.probs().end());
  for (const Token t : removed) {
    if (t >= weights.size()) {
      throw std::out_of_range("remove_renormalize: token outside vocabulary");
    }
    weights[t] = 0.0;
  }
  if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) {
    throw AllZeroMass("remove_renormalize: removal exhausts the support");
  }
  return normalize(weights);
}

}  // namespace awrs
