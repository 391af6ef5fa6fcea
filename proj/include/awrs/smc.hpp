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

#ifndef AWRS_SMC_HPP
#define AWRS_SMC_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <awrs/constraints.hpp>
#include <awrs/oracle.hpp>
#include <awrs/rng.hpp>
#include <awrs/samplers.hpp>
#include <awrs/toylm.hpp>

/**
 * \file
 * \brief Sequential Monte Carlo over token strings.
 *
 * Every engine keeps N particles. At each step the active particles are
 * extended by one token and reweighted; the ensemble is resampled when the
 * effective sample size drops strictly below tau * N. A particle finishes
 * when it emits eos (which is not stored in its prefix).
 *
 * Particle i at step t draws from the stream (seed, i, t), so output does not
 * depend on the number of worker threads.
 */

namespace awrs {

struct Particle {
  TokenString prefix;
  double weight = 1.0;
  bool complete = false;  ///< emitted eos

  /// Only live, unfinished particles are extended.
  [[nodiscard]] bool active() const noexcept { return !complete && weight > 0.0; }
};

struct Ensemble {
  std::vector<Particle> particles;
  double g_hat = 0.0;                                ///< mean final weight
  std::map<TokenString, double> posterior_estimate;  ///< normalized weight per complete string
  std::vector<std::uint64_t> evals_per_step;         ///< constraint evaluations at each step
  std::uint64_t total_evals = 0;
  std::size_t resample_count = 0;
  std::size_t steps = 0;
};

/// (sum w)^2 / sum w^2. Throws AllDead when every weight is zero.
[[nodiscard]] double ess(std::span<const double> weights);

enum class Resampling { kMultinomial, kStratified };

[[nodiscard]] std::string_view to_string(Resampling scheme) noexcept;
[[nodiscard]] std::optional<Resampling> parse_resampling(std::string_view name) noexcept;

/// N ancestors drawn proportionally to weight; every new weight is W / N.
[[nodiscard]] std::vector<Particle> resample_multinomial(std::span<const Particle> particles, Rng& rng);

/// One uniform per stratum [i/N, (i+1)/N) of the cumulative weight.
[[nodiscard]] std::vector<Particle> resample_stratified(std::span<const Particle> particles, Rng& rng);

[[nodiscard]] std::vector<Particle> resample(std::span<const Particle> particles, Resampling scheme, Rng& rng);

struct SmcConfig {
  std::size_t num_particles = 1000;
  double tau = 0.5;
  std::uint64_t seed = 0;
  std::size_t max_steps = 64;  ///< unfinished particles get weight 0
  unsigned workers = 1;
  Resampling resampling = Resampling::kStratified;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Proposal from the LM, weight multiplied by c(x') at every step.
[[nodiscard]] Ensemble smc_twist(const ToyLM& lm, const IncrementalConstraint& constraint, const SmcConfig& config);

/// Properly weighted proposal: x' from `sampler`, weight multiplied by its zhat.
[[nodiscard]] Ensemble smc_pwp(const ToyLM& lm, const IncrementalConstraint& constraint, WeightedSampler sampler,
                               const SamplerConfig& sampler_config, const SmcConfig& config);

/// Independent locally constrained rollouts weighted by the product of local Z (no resampling).
[[nodiscard]] Ensemble importance_sample(const ToyLM& lm, const IncrementalConstraint& constraint,
                                         const SmcConfig& config);

/// Unconstrained rollouts weighted by the verifier. Throws AllDead if none passes.
[[nodiscard]] Ensemble sample_verify(const ToyLM& lm, const StringPredicate& verifier, const SmcConfig& config);

/// Unconstrained rollouts; every weight is 1.
[[nodiscard]] Ensemble sample_lm(const ToyLM& lm, const SmcConfig& config);

enum class LcdSampler { kArs, kTokenMask };

/// One locally constrained rollout without weights. Throws DeadPrefix when a step has Z = 0.
[[nodiscard]] TokenString lcd_generate(const ToyLM& lm, const IncrementalConstraint& constraint, LcdSampler sampler,
                                       Rng& rng, std::uint64_t* evals = nullptr);

}  // namespace awrs

#endif
