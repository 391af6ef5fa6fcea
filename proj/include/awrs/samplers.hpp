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

#ifndef AWRS_SAMPLERS_HPP
#define AWRS_SAMPLERS_HPP

#include <cstdint>
#include <optional>
#include <string_view>

#include <awrs/categorical.hpp>
#include <awrs/constraints.hpp>
#include <awrs/rng.hpp>

/**
 * \file
 * \brief Exact constrained-token samplers and their weighted variants.
 *
 * Every sampler draws from a local prior restricted by a token constraint.
 * The weighted samplers additionally return an estimate `zhat` of the valid
 * mass Z, and are properly weighted: E[zhat * f(token)] = sum_x p(x) c(x) f(x)
 * for every test function f. `trials` counts constraint evaluations.
 *
 * Zero-mass tokens are never drawn and never evaluated.
 */

namespace awrs {

/// Unweighted draw.
struct DrawResult {
  Token token = 0;
  std::uint64_t trials = 0;
};

/// A token with an unbiased estimate of its local normalizing constant.
struct WeightedToken {
  Token token = 0;
  double zhat = 0.0;
  std::uint64_t trials = 0;          ///< constraint evaluations
  std::uint64_t rejected_calls = 0;  ///< evaluations that returned false
  double rejected_mass_first_loop = 0.0;

  [[nodiscard]] std::uint64_t accepted_calls() const noexcept { return trials - rejected_calls; }
};

/// Rejection sampling with replacement. Expected trials 1/Z.
DrawResult rs(const Categorical& prior, const TokenConstraint& c, Rng& rng);

/// Rejection sampling that removes every rejected token. Trials <= #invalid + 1.
DrawResult ars(const Categorical& prior, const TokenConstraint& c, Rng& rng);

/// L+1 with-replacement rejection loops; zhat = L / (n + L) with n total rejections.
WeightedToken wrs(const Categorical& prior, const TokenConstraint& c, unsigned extra_loops, Rng& rng);

/// Adaptive weighted rejection sampling, one extra loop.
/**
 * The first without-replacement loop yields the token; a second loop keeps the
 * first loop's rejections removed (the accepted token stays in the pool).
 * zhat = (1 - psi0) / (n + 1), psi0 the first-loop rejected mass and n the
 * rejection count over both loops.
 */
WeightedToken awrs(const Categorical& prior, const TokenConstraint& c, Rng& rng);

/// AWRS driven by a precomputed exponential-race ordering.
/**
 * Distributionally identical to `awrs`. The accepted token re-enters the
 * second loop with a fresh key offset from its old one. With `lookahead > 1`
 * constraint evaluations are issued concurrently in windows of that size;
 * evaluations past the first acceptance are not counted in `trials` (the
 * constraint's own counter still sees them).
 */
WeightedToken awrs_sorted(const Categorical& prior, const TokenConstraint& c, const KeyedOrdering& ordering, Rng& rng,
                          unsigned lookahead = 1);

/// Clipped AWRS with rejected-mass thresholds 0 < theta0 < theta1 < 1.
/**
 * When the first loop's rejected mass passes theta0, one probe token is drawn
 * from the remaining pool and returned; zhat is 0 if it is invalid. The second
 * loop stops at acceptance or, before any draw, once the total rejected mass
 * exceeds theta1. zhat = (n1 + 1)^[psi0 > theta0] (1 - psi0) / (n + 1).
 */
WeightedToken cawrs(const Categorical& prior, const TokenConstraint& c, double theta0, double theta1, Rng& rng);

/// With-replacement sampling stopped at L+1 acceptances or R rejections.
/**
 * With s acceptances among m draws, zhat = (s - 1) / (m - 1) on an
 * acceptance stop and s / (m - 1) on a rejection stop.
 */
WeightedToken cwrs(const Categorical& prior, const TokenConstraint& c, unsigned extra_loops, std::uint64_t budget,
                   Rng& rng);

/// Without-replacement version of `cwrs` that counts geometric phantom repeats of removed tokens.
WeightedToken gawrs(const Categorical& prior, const TokenConstraint& c, unsigned extra_loops, std::uint64_t budget,
                    Rng& rng);

/// Recursive estimator over a without-replacement scan of at most R tokens plus one probe.
WeightedToken rawrs(const Categorical& prior, const TokenConstraint& c, std::uint64_t budget, Rng& rng);

/// Token masking as a weighted sampler: zhat = Z exactly, V evaluations.
WeightedToken exact_weighted(const Categorical& prior, const TokenConstraint& c, Rng& rng);

/// Nucleus truncation; ties at the boundary probability are kept.
[[nodiscard]] Categorical top_p_compose(const Categorical& prior, double top_p);

enum class WeightedSampler { kExact, kWrs, kAwrs, kAwrsSorted, kCawrs, kCwrs, kGawrs, kRawrs };

[[nodiscard]] std::string_view to_string(WeightedSampler sampler) noexcept;
[[nodiscard]] std::optional<WeightedSampler> parse_weighted_sampler(std::string_view name) noexcept;

struct SamplerConfig {
  unsigned extra_loops = 1;    ///< L
  double theta0 = 0.5;         ///< clipped AWRS, first loop
  double theta1 = 0.9;         ///< clipped AWRS, second loop
  std::uint64_t budget = 100;  ///< R
  std::optional<double> top_p;
  unsigned lookahead = 1;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Dispatches to the named weighted sampler. `top_p`, when set, truncates the prior first.
WeightedToken sample_weighted(WeightedSampler sampler, const SamplerConfig& config, const Categorical& prior,
                              const TokenConstraint& c, Rng& rng);

}  // namespace awrs

#endif
