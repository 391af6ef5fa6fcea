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

#include <awrs/smc.hpp>

#include <algorithm>
#include <functional>
#include <limits>

#include <awrs/errors.hpp>
#include <awrs/numeric.hpp>
#include <awrs/parallel.hpp>

namespace awrs {

namespace {

constexpr std::uint64_t kResampleStream = std::numeric_limits<std::uint64_t>::max();

struct Extension {
  Token token = 0;
  double factor = 1.0;
  std::uint64_t evals = 0;
};

using Extender = std::function<Extension(const TokenString& prefix, Rng& rng)>;

double total_weight(std::span<const Particle> particles) {
  CompensatedSum w;
  for (const auto& p : particles) {
    w += p.weight;
  }
  return w.value();
}

std::vector<Particle> copy_ancestors(std::span<const Particle> particles, std::span<const std::size_t> ancestors,
                                     double weight) {
  std::vector<Particle> out;
  out.reserve(ancestors.size());
  for (const auto a : ancestors) {
    out.push_back(particles[a]);
    out.back().weight = weight;
  }
  return out;
}

void finalize(Ensemble& out) {
  const double w = total_weight(out.particles);
  if (!(w > 0.0)) {
    throw AllDead("every particle has zero weight");
  }
  out.g_hat = w / static_cast<double>(out.particles.size());
  out.posterior_estimate.clear();
  for (const auto& p : out.particles) {
    if (p.weight > 0.0) {
      out.posterior_estimate[p.prefix] += p.weight / w;
    }
  }
}

// A constraint bound to `prefix` that also counts into a private counter.
struct CountedConstraint {
  TokenConstraint bound;
  TokenConstraint counted;

  CountedConstraint(const IncrementalConstraint& constraint, const TokenString& prefix)
      : bound{constraint.at(prefix)}, counted{[this](Token t) { return bound(t); }} {}
  CountedConstraint(const CountedConstraint&) = delete;
  CountedConstraint& operator=(const CountedConstraint&) = delete;
};

Ensemble run_engine(const ToyLM& lm, const SmcConfig& config, const Extender& extend, bool allow_resampling) {
  config.validate();
  const std::size_t n = config.num_particles;
  Ensemble out;
  out.particles.assign(n, Particle{});
  std::vector<std::uint64_t> evals(n, 0);
  const Token eos = lm.eos();

  for (std::size_t step = 0; step < config.max_steps; ++step) {
    if (std::none_of(out.particles.begin(), out.particles.end(), [](const Particle& p) { return p.active(); })) {
      break;
    }
    std::fill(evals.begin(), evals.end(), 0);
    parallel_for(n, config.workers, [&](std::size_t i) {
      Particle& p = out.particles[i];
      if (!p.active()) {
        return;
      }
      Rng rng{config.seed, stream_id(i, step)};
      const Extension e = extend(p.prefix, rng);
      evals[i] = e.evals;
      p.weight *= e.factor;
      if (e.token == eos) {
        p.complete = true;
      } else {
        p.prefix.push_back(e.token);
      }
    });
    std::uint64_t step_evals = 0;
    for (const auto e : evals) {
      step_evals += e;
    }
    out.evals_per_step.push_back(step_evals);
    out.total_evals += step_evals;
    ++out.steps;

    std::vector<double> weights(n);
    std::transform(out.particles.begin(), out.particles.end(), weights.begin(),
                   [](const Particle& p) { return p.weight; });
    const double current = ess(weights);
    if (allow_resampling && current < config.tau * static_cast<double>(n)) {
      Rng rng{config.seed, stream_id(kResampleStream, step)};
      out.particles = resample(out.particles, config.resampling, rng);
      ++out.resample_count;
    }
  }
  for (auto& p : out.particles) {
    if (!p.complete) {
      p.weight = 0.0;
    }
  }
  finalize(out);
  return out;
}

Extension lm_step(const ToyLM& lm, const TokenString& prefix, Rng& rng) {
  return {lm.next_dist(prefix).sample(rng), 1.0, 0};
}

}  // namespace

double ess(std::span<const double> weights) {
  CompensatedSum w;
  CompensatedSum w2;
  for (const double x : weights) {
    w += x;
    w2 += x * x;
  }
  if (!(w.value() > 0.0)) {
    throw AllDead("every particle has zero weight");
  }
  const double value = w.value() * w.value() / w2.value();
  return std::clamp(value, 1.0, static_cast<double>(weights.size()));
}

std::string_view to_string(Resampling scheme) noexcept {
  return scheme == Resampling::kMultinomial ? "multinomial" : "stratified";
}

std::optional<Resampling> parse_resampling(std::string_view name) noexcept {
  if (name == "multinomial") {
    return Resampling::kMultinomial;
  }
  if (name == "stratified") {
    return Resampling::kStratified;
  }
  return std::nullopt;
}

std::vector<Particle> resample_multinomial(std::span<const Particle> particles, Rng& rng) {
  const double w = total_weight(particles);
  if (!(w > 0.0)) {
    throw AllDead("cannot resample: every particle has zero weight");
  }
  std::vector<double> weights(particles.size());
  std::transform(particles.begin(), particles.end(), weights.begin(), [](const Particle& p) { return p.weight; });
  const Categorical dist = normalize(weights);
  std::vector<std::size_t> ancestors(particles.size());
  for (auto& a : ancestors) {
    a = dist.sample(rng);
  }
  std::sort(ancestors.begin(), ancestors.end());
  return copy_ancestors(particles, ancestors, w / static_cast<double>(particles.size()));
}

std::vector<Particle> resample_stratified(std::span<const Particle> particles, Rng& rng) {
  const double w = total_weight(particles);
  if (!(w > 0.0)) {
    throw AllDead("cannot resample: every particle has zero weight");
  }
  const std::size_t n = particles.size();
  std::vector<std::size_t> ancestors;
  ancestors.reserve(n);
  std::size_t j = 0;
  double cumulative = particles[0].weight / w;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + rng.uniform()) / static_cast<double>(n);
    while (u >= cumulative && j + 1 < n) {
      ++j;
      cumulative += particles[j].weight / w;
    }
    // Guard against rounding landing on a zero-weight tail particle.
    std::size_t pick = j;
    while (particles[pick].weight == 0.0 && pick > 0) {
      --pick;
    }
    ancestors.push_back(pick);
  }
  return copy_ancestors(particles, ancestors, w / static_cast<double>(n));
}

std::vector<Particle> resample(std::span<const Particle> particles, Resampling scheme, Rng& rng) {
  return scheme == Resampling::kMultinomial ? resample_multinomial(particles, rng)
                                            : resample_stratified(particles, rng);
}

void SmcConfig::validate() const {
  if (num_particles < 1) {
    throw ConfigError("N must be at least 1");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw ConfigError("tau must lie in [0, 1]");
  }
  if (max_steps < 1) {
    throw ConfigError("max_steps must be at least 1");
  }
}

Ensemble smc_twist(const ToyLM& lm, const IncrementalConstraint& constraint, const SmcConfig& config) {
  const auto extend = [&](const TokenString& prefix, Rng& rng) {
    Extension e = lm_step(lm, prefix, rng);
    e.factor = constraint(prefix, e.token) ? 1.0 : 0.0;
    e.evals = 1;
    return e;
  };
  return run_engine(lm, config, extend, true);
}

Ensemble smc_pwp(const ToyLM& lm, const IncrementalConstraint& constraint, WeightedSampler sampler,
                 const SamplerConfig& sampler_config, const SmcConfig& config) {
  sampler_config.validate();
  const auto extend = [&](const TokenString& prefix, Rng& rng) {
    CountedConstraint c{constraint, prefix};
    Extension e;
    try {
      const WeightedToken w = sample_weighted(sampler, sampler_config, lm.next_dist(prefix), c.counted, rng);
      e.token = w.token;
      e.factor = w.zhat;
    } catch (const NoValidToken&) {
      e.factor = 0.0;
    }
    e.evals = c.counted.eval_count();
    return e;
  };
  return run_engine(lm, config, extend, true);
}

Ensemble importance_sample(const ToyLM& lm, const IncrementalConstraint& constraint, const SmcConfig& config) {
  const auto extend = [&](const TokenString& prefix, Rng& rng) {
    CountedConstraint c{constraint, prefix};
    Extension e;
    try {
      const LocalPosterior local = token_mask(lm.next_dist(prefix), c.counted);
      e.token = local.post.sample(rng);
      e.factor = local.z;
    } catch (const NoValidToken&) {
      e.factor = 0.0;
    }
    e.evals = c.counted.eval_count();
    return e;
  };
  return run_engine(lm, config, extend, false);
}

Ensemble sample_lm(const ToyLM& lm, const SmcConfig& config) {
  const auto extend = [&](const TokenString& prefix, Rng& rng) { return lm_step(lm, prefix, rng); };
  return run_engine(lm, config, extend, false);
}

Ensemble sample_verify(const ToyLM& lm, const StringPredicate& verifier, const SmcConfig& config) {
  Ensemble out = sample_lm(lm, config);
  for (auto& p : out.particles) {
    if (p.weight > 0.0) {
      p.weight = verifier(p.prefix) ? 1.0 : 0.0;
      ++out.total_evals;
    }
  }
  finalize(out);
  return out;
}

TokenString lcd_generate(const ToyLM& lm, const IncrementalConstraint& constraint, LcdSampler sampler, Rng& rng,
                         std::uint64_t* evals) {
  TokenString prefix;
  const Token eos = lm.eos();
  for (;;) {
    CountedConstraint c{constraint, prefix};
    const Categorical& prior = lm.next_dist(prefix);
    Token t = 0;
    try {
      t = sampler == LcdSampler::kArs ? ars(prior, c.counted, rng).token : token_mask(prior, c.counted).post.sample(rng);
    } catch (const NoValidToken&) {
      throw DeadPrefix("no valid continuation after a prefix of length " + std::to_string(prefix.size()));
    }
    if (evals != nullptr) {
      *evals += c.counted.eval_count();
    }
    if (t == eos) {
      return prefix;
    }
    prefix.push_back(t);
  }
}

}  // namespace awrs
