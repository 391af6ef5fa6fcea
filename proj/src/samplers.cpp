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

#include <awrs/samplers.hpp>

#include <algorithm>
#include <array>
#include <future>
#include <limits>
#include <numeric>
#include <vector>

#include <awrs/errors.hpp>
#include <awrs/numeric.hpp>
#include <awrs/oracle.hpp>

namespace awrs {

namespace {

// Draws from the prior restricted to tokens not yet removed.
/**
 * Removed mass is kept in a Fenwick tree over token ids, so a draw is an
 * inverse-CDF search on cdf(i) - removed(<= i) in O(log^2 V).
 */
class RemovalPool {
 public:
  explicit RemovalPool(const Categorical& prior) : prior_{prior} {}

  Token draw(Rng& rng) const {
    if (removed_count_ == 0) {
      return prior_.sample(rng);
    }
    const auto cdf = prior_.cdf();
    const std::size_t v = cdf.size();
    const double u = rng.uniform() * remaining_at(v - 1);
    std::size_t lo = 0;
    std::size_t hi = v - 1;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (remaining_at(mid) > u) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return settle(lo);
  }

  void remove(Token t) {
    if (removed_.empty()) {
      removed_.assign(prior_.vocab_size(), 0);
      tree_.assign(prior_.vocab_size() + 1, 0.0);
    }
    removed_[t] = 1;
    removed_mass_ += prior_[t];
    ++removed_count_;
    for (std::size_t i = t + 1; i < tree_.size(); i += i & (~i + 1)) {
      tree_[i] += prior_[t];
    }
  }

  [[nodiscard]] bool exhausted() const noexcept { return removed_count_ >= prior_.support_size(); }
  [[nodiscard]] double removed_mass() const noexcept { return removed_mass_.value(); }

 private:
  [[nodiscard]] double remaining_at(std::size_t i) const {
    double removed = 0.0;
    for (std::size_t j = i + 1; j > 0; j -= j & (~j + 1)) {
      removed += tree_[j];
    }
    return prior_.cdf()[i] - removed;
  }

  [[nodiscard]] bool available(std::size_t i) const { return removed_[i] == 0 && prior_[static_cast<Token>(i)] > 0.0; }

  // Rounding can leave the search on a removed or zero-mass token; step to the nearest live one.
  [[nodiscard]] Token settle(std::size_t i) const {
    for (std::size_t j = i; j < removed_.size(); ++j) {
      if (available(j)) {
        return static_cast<Token>(j);
      }
    }
    for (std::size_t j = i; j-- > 0;) {
      if (available(j)) {
        return static_cast<Token>(j);
      }
    }
    throw NoValidToken("pool is empty");
  }

  const Categorical& prior_;
  std::vector<char> removed_;
  std::vector<double> tree_;
  CompensatedSum removed_mass_;
  std::size_t removed_count_ = 0;
};

// Detects Z == 0 for with-replacement samplers: every positive-mass token rejected at least once.
class RejectionTracker {
 public:
  explicit RejectionTracker(const Categorical& prior) : prior_{prior} {}

  void record(Token t) {
    if (seen_.empty()) {
      seen_.assign(prior_.vocab_size(), 0);
    }
    if (seen_[t] == 0) {
      seen_[t] = 1;
      if (++distinct_ >= prior_.support_size()) {
        throw NoValidToken("every positive-mass token violates the constraint");
      }
    }
  }

 private:
  const Categorical& prior_;
  std::vector<char> seen_;
  std::size_t distinct_ = 0;
};

void require_support(const Categorical& prior) {
  if (prior.support_size() == 0) {
    throw NoValidToken("prior has no support");
  }
}

double clipped_estimate(std::uint64_t accepted, std::uint64_t rejected, unsigned extra_loops) {
  const std::uint64_t total = accepted + rejected;
  if (accepted == extra_loops + 1U) {
    return static_cast<double>(accepted - 1) / static_cast<double>(total - 1);
  }
  if (accepted == 0 || total <= 1) {
    return 0.0;
  }
  return static_cast<double>(accepted) / static_cast<double>(total - 1);
}

// Index of the first accepted element of seq[begin, end), evaluating in windows of `lookahead`.
// `counted` grows by the number of evaluations at or before the accepted index.
std::optional<std::size_t> first_accept(const std::vector<Token>& seq, std::size_t begin, std::size_t end,
                                        const TokenConstraint& c, unsigned lookahead, std::uint64_t& counted) {
  if (lookahead <= 1) {
    for (std::size_t i = begin; i < end; ++i) {
      ++counted;
      if (c(seq[i])) {
        return i;
      }
    }
    return std::nullopt;
  }
  std::vector<std::future<bool>> window;
  for (std::size_t lo = begin; lo < end; lo += lookahead) {
    const std::size_t hi = std::min(end, lo + lookahead);
    window.clear();
    for (std::size_t i = lo; i < hi; ++i) {
      window.push_back(std::async(std::launch::async, [&c, t = seq[i]] { return c(t); }));
    }
    std::optional<std::size_t> hit;
    for (std::size_t i = lo; i < hi; ++i) {
      const bool ok = window[i - lo].get();
      if (ok && !hit) {
        hit = i;
      }
    }
    if (hit) {
      counted += *hit - lo + 1;
      return hit;
    }
    counted += hi - lo;
  }
  return std::nullopt;
}

}  // namespace

DrawResult rs(const Categorical& prior, const TokenConstraint& c, Rng& rng) {
  require_support(prior);
  RejectionTracker tracker{prior};
  DrawResult out;
  for (;;) {
    const Token t = prior.sample(rng);
    ++out.trials;
    if (c(t)) {
      out.token = t;
      return out;
    }
    tracker.record(t);
  }
}

DrawResult ars(const Categorical& prior, const TokenConstraint& c, Rng& rng) {
  require_support(prior);
  RemovalPool pool{prior};
  DrawResult out;
  while (!pool.exhausted()) {
    const Token t = pool.draw(rng);
    ++out.trials;
    if (c(t)) {
      out.token = t;
      return out;
    }
    pool.remove(t);
  }
  throw NoValidToken("ars: every positive-mass token violates the constraint");
}

WeightedToken wrs(const Categorical& prior, const TokenConstraint& c, unsigned extra_loops, Rng& rng) {
  if (extra_loops < 1) {
    throw ConfigError("wrs: L must be at least 1");
  }
  require_support(prior);
  RejectionTracker tracker{prior};
  WeightedToken out;
  for (unsigned loop = 0; loop <= extra_loops; ++loop) {
    for (;;) {
      const Token t = prior.sample(rng);
      ++out.trials;
      if (c(t)) {
        if (loop == 0) {
          out.token = t;
        }
        break;
      }
      ++out.rejected_calls;
      tracker.record(t);
    }
  }
  out.zhat = static_cast<double>(extra_loops) / static_cast<double>(out.rejected_calls + extra_loops);
  return out;
}

WeightedToken awrs(const Categorical& prior, const TokenConstraint& c, Rng& rng) {
  require_support(prior);
  RemovalPool pool{prior};
  WeightedToken out;
  std::uint64_t rejections = 0;
  for (;;) {
    if (pool.exhausted()) {
      throw NoValidToken("awrs: every positive-mass token violates the constraint");
    }
    const Token t = pool.draw(rng);
    ++out.trials;
    if (c(t)) {
      out.token = t;
      break;
    }
    pool.remove(t);
    ++rejections;
  }
  const double psi0 = pool.removed_mass();
  // The accepted token is still in the pool, so this loop always terminates.
  for (;;) {
    const Token t = pool.draw(rng);
    ++out.trials;
    if (c(t)) {
      break;
    }
    pool.remove(t);
    ++rejections;
  }
  out.rejected_calls = rejections;
  out.rejected_mass_first_loop = psi0;
  out.zhat = (1.0 - psi0) / static_cast<double>(rejections + 1);
  return out;
}

WeightedToken awrs_sorted(const Categorical& prior, const TokenConstraint& c, const KeyedOrdering& ordering, Rng& rng,
                          unsigned lookahead) {
  require_support(prior);
  const auto& order = ordering.order;
  const auto& keys = ordering.keys;
  if (order.size() != prior.vocab_size() || keys.size() != prior.vocab_size()) {
    throw std::invalid_argument("awrs_sorted: ordering does not match the prior");
  }
  // Positive-mass tokens occupy the front of the order.
  const std::size_t live_end = prior.support_size();
  WeightedToken out;

  const auto first = first_accept(order, 0, live_end, c, lookahead, out.trials);
  if (!first) {
    throw NoValidToken("awrs_sorted: every positive-mass token violates the constraint");
  }
  const std::size_t j = *first;
  out.token = order[j];
  CompensatedSum psi0;
  for (std::size_t i = 0; i < j; ++i) {
    psi0 += prior[order[i]];
  }

  // Memorylessness: residual keys of unscanned tokens are fresh exponentials, so
  // the accepted token competes again with key + Exp(p).
  const double requeued = keys[out.token] + rng.exponential() / prior[out.token];
  const auto boundary = std::lower_bound(order.begin() + static_cast<std::ptrdiff_t>(j + 1),
                                         order.begin() + static_cast<std::ptrdiff_t>(live_end), requeued,
                                         [&](Token t, double key) { return keys[t] < key; });
  const auto end1 = static_cast<std::size_t>(boundary - order.begin());
  const auto second = first_accept(order, j + 1, end1, c, lookahead, out.trials);
  std::uint64_t rejections = j;
  if (second) {
    rejections += *second - (j + 1);
  } else {
    rejections += end1 - (j + 1);
    ++out.trials;
    static_cast<void>(c(out.token));
  }
  out.rejected_calls = rejections;
  out.rejected_mass_first_loop = psi0.value();
  out.zhat = (1.0 - psi0.value()) / static_cast<double>(rejections + 1);
  return out;
}

WeightedToken cawrs(const Categorical& prior, const TokenConstraint& c, double theta0, double theta1, Rng& rng) {
  if (!(theta0 > 0.0 && theta0 < theta1 && theta1 < 1.0)) {
    throw ConfigError("cawrs: thresholds must satisfy 0 < theta0 < theta1 < 1");
  }
  require_support(prior);
  RemovalPool pool{prior};
  WeightedToken out;
  std::uint64_t first_rejections = 0;
  bool overflow = false;
  Token last = 0;
  for (;;) {
    if (pool.exhausted()) {
      overflow = true;
      break;
    }
    const Token t = pool.draw(rng);
    last = t;
    ++out.trials;
    if (c(t)) {
      out.token = t;
      break;
    }
    pool.remove(t);
    ++first_rejections;
    ++out.rejected_calls;
    if (pool.removed_mass() > theta0) {
      overflow = true;
      break;
    }
  }
  const double psi0 = pool.removed_mass();
  out.rejected_mass_first_loop = psi0;

  if (overflow) {
    if (pool.exhausted()) {
      out.token = last;
      out.zhat = 0.0;
      return out;
    }
    const Token probe = pool.draw(rng);
    ++out.trials;
    out.token = probe;
    if (!c(probe)) {
      ++out.rejected_calls;
      out.zhat = 0.0;
      return out;
    }
  }

  std::uint64_t second_rejections = 0;
  while (pool.removed_mass() <= theta1) {
    const Token t = pool.draw(rng);
    ++out.trials;
    if (c(t)) {
      break;
    }
    pool.remove(t);
    ++second_rejections;
    ++out.rejected_calls;
  }
  const auto n = static_cast<double>(first_rejections + second_rejections);
  const double scale = overflow ? static_cast<double>(second_rejections + 1) : 1.0;
  out.zhat = scale * (1.0 - psi0) / (n + 1.0);
  return out;
}

WeightedToken cwrs(const Categorical& prior, const TokenConstraint& c, unsigned extra_loops, std::uint64_t budget,
                   Rng& rng) {
  if (extra_loops < 1 || budget < 1) {
    throw ConfigError("cwrs: L and R must be at least 1");
  }
  require_support(prior);
  WeightedToken out;
  std::uint64_t accepted = 0;
  std::optional<Token> first;
  std::optional<Token> first_accepted;
  while (accepted < extra_loops + 1U && out.rejected_calls < budget) {
    const Token t = prior.sample(rng);
    ++out.trials;
    if (!first) {
      first = t;
    }
    if (c(t)) {
      ++accepted;
      if (!first_accepted) {
        first_accepted = t;
      }
    } else {
      ++out.rejected_calls;
    }
  }
  out.token = first_accepted.value_or(*first);
  out.zhat = clipped_estimate(accepted, out.rejected_calls, extra_loops);
  return out;
}

WeightedToken gawrs(const Categorical& prior, const TokenConstraint& c, unsigned extra_loops, std::uint64_t budget,
                    Rng& rng) {
  if (extra_loops < 1 || budget < 1) {
    throw ConfigError("gawrs: L and R must be at least 1");
  }
  require_support(prior);
  RemovalPool pool{prior};
  WeightedToken out;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;  // real rejections plus phantom repeats
  std::optional<Token> first;
  std::optional<Token> first_accepted;
  for (;;) {
    const std::uint64_t phantoms = pool.exhausted() ? std::numeric_limits<std::uint64_t>::max()
                                                    : rng.geometric_failures(pool.removed_mass());
    if (phantoms >= budget - rejected) {
      rejected = budget;  // the budget ran out inside a run of phantoms
      break;
    }
    rejected += phantoms;
    const Token t = pool.draw(rng);
    ++out.trials;
    if (!first) {
      first = t;
    }
    if (c(t)) {
      if (!first_accepted) {
        first_accepted = t;
      }
      if (++accepted == extra_loops + 1U) {
        break;
      }
    } else {
      pool.remove(t);
      ++out.rejected_calls;
      if (++rejected >= budget) {
        break;
      }
    }
  }
  out.token = first_accepted.value_or(first.value_or(0));
  out.zhat = clipped_estimate(accepted, rejected, extra_loops);
  return out;
}

WeightedToken rawrs(const Categorical& prior, const TokenConstraint& c, std::uint64_t budget, Rng& rng) {
  if (budget < 1) {
    throw ConfigError("rawrs: R must be at least 1");
  }
  require_support(prior);
  RemovalPool pool{prior};
  WeightedToken out;
  for (std::uint64_t i = 1;; ++i) {
    if (pool.exhausted()) {
      out.zhat = 0.0;
      return out;
    }
    // eta_i: mass not yet scanned, i.e. the product of (1 - q_j) for j < i.
    const double eta = 1.0 - pool.removed_mass();
    const Token t = pool.draw(rng);
    out.token = t;
    ++out.trials;
    if (c(t)) {
      if (i == budget) {
        out.zhat = eta;
        return out;
      }
      const double q = std::min(1.0, prior[t] / eta);
      pool.remove(t);
      if (pool.exhausted()) {
        out.zhat = eta;
        return out;
      }
      const Token probe = pool.draw(rng);
      ++out.trials;
      if (c(probe)) {
        out.zhat = eta;
      } else {
        ++out.rejected_calls;
        out.zhat = q * eta;
      }
      return out;
    }
    ++out.rejected_calls;
    if (i == budget) {
      out.zhat = 0.0;
      return out;
    }
    pool.remove(t);
  }
}

WeightedToken exact_weighted(const Categorical& prior, const TokenConstraint& c, Rng& rng) {
  auto local = token_mask(prior, c);
  WeightedToken out;
  out.token = local.post.sample(rng);
  out.zhat = local.z;
  out.trials = prior.vocab_size();
  return out;
}

Categorical top_p_compose(const Categorical& dist, double top_p) {
  if (!(top_p > 0.0) || top_p > 1.0) {
    throw std::invalid_argument("top_p must lie in (0, 1]");
  }
  if (top_p >= 1.0) {
    return dist;
  }
  const auto probs = dist.probs();
  std::vector<Token> order(probs.size());
  std::iota(order.begin(), order.end(), Token{0});
  std::stable_sort(order.begin(), order.end(), [&](Token a, Token b) { return probs[a] > probs[b]; });

  std::vector<double> kept(probs.size(), 0.0);
  CompensatedSum mass;
  double boundary = -1.0;
  for (const Token t : order) {
    if (boundary >= 0.0 && probs[t] < boundary) {
      break;
    }
    kept[t] = probs[t];
    mass += probs[t];
    if (boundary < 0.0 && mass.value() >= top_p - 1e-12) {
      boundary = probs[t];
    }
  }
  return normalize(kept);
}

std::string_view to_string(WeightedSampler sampler) noexcept {
  switch (sampler) {
    case WeightedSampler::kExact:
      return "exact";
    case WeightedSampler::kWrs:
      return "wrs";
    case WeightedSampler::kAwrs:
      return "awrs";
    case WeightedSampler::kAwrsSorted:
      return "awrs-sorted";
    case WeightedSampler::kCawrs:
      return "cawrs";
    case WeightedSampler::kCwrs:
      return "cwrs";
    case WeightedSampler::kGawrs:
      return "gawrs";
    case WeightedSampler::kRawrs:
      return "rawrs";
  }
  return "unknown";
}

std::optional<WeightedSampler> parse_weighted_sampler(std::string_view name) noexcept {
  constexpr std::array all{WeightedSampler::kExact, WeightedSampler::kWrs,   WeightedSampler::kAwrs,
                           WeightedSampler::kAwrsSorted, WeightedSampler::kCawrs, WeightedSampler::kCwrs,
                           WeightedSampler::kGawrs, WeightedSampler::kRawrs};
  for (const auto s : all) {
    if (to_string(s) == name) {
      return s;
    }
  }
  if (name == "token-mask") {
    return WeightedSampler::kExact;
  }
  return std::nullopt;
}

void SamplerConfig::validate() const {
  if (extra_loops < 1) {
    throw ConfigError("L must be at least 1");
  }
  if (!(theta0 > 0.0 && theta0 < theta1 && theta1 < 1.0)) {
    throw ConfigError("thresholds must satisfy 0 < theta0 < theta1 < 1");
  }
  if (budget < 1) {
    throw ConfigError("R must be at least 1");
  }
  if (top_p && !(*top_p > 0.0 && *top_p <= 1.0)) {
    throw ConfigError("top_p must lie in (0, 1]");
  }
  if (lookahead < 1) {
    throw ConfigError("lookahead must be at least 1");
  }
}

WeightedToken sample_weighted(WeightedSampler sampler, const SamplerConfig& config, const Categorical& prior,
                              const TokenConstraint& c, Rng& rng) {
  if (config.top_p && *config.top_p < 1.0) {
    const auto truncated = top_p_compose(prior, *config.top_p);
    SamplerConfig plain = config;
    plain.top_p.reset();
    return sample_weighted(sampler, plain, truncated, c, rng);
  }
  switch (sampler) {
    case WeightedSampler::kExact:
      return exact_weighted(prior, c, rng);
    case WeightedSampler::kWrs:
      return wrs(prior, c, config.extra_loops, rng);
    case WeightedSampler::kAwrs:
      return awrs(prior, c, rng);
    case WeightedSampler::kAwrsSorted: {
      const auto ordering = swor_keys(prior, rng);
      return awrs_sorted(prior, c, ordering, rng, config.lookahead);
    }
    case WeightedSampler::kCawrs:
      return cawrs(prior, c, config.theta0, config.theta1, rng);
    case WeightedSampler::kCwrs:
      return cwrs(prior, c, config.extra_loops, config.budget, rng);
    case WeightedSampler::kGawrs:
      return gawrs(prior, c, config.extra_loops, config.budget, rng);
    case WeightedSampler::kRawrs:
      return rawrs(prior, c, config.budget, rng);
  }
  throw ConfigError("unknown sampler");
}

}  // namespace awrs
