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

#ifndef AWRS_HARNESS_HPP
#define AWRS_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <awrs/categorical.hpp>
#include <awrs/constraints.hpp>
#include <awrs/rng.hpp>
#include <awrs/samplers.hpp>

/**
 * \file
 * \brief Batch simulation studies over single-step sampling instances.
 *
 * Every sweep is a pure function of its configuration: each (instance,
 * sampler, parameter) cell draws from its own stream, and rows are emitted in
 * a fixed order regardless of the worker count.
 */

namespace awrs {

struct InstanceSpec {
  std::size_t vocab = 1000;
  bool dirichlet_prior = true;  ///< otherwise uniform
  std::uint64_t seed = 0;
};

/// A prior with a fixed valid set, Z > 0.
struct Instance {
  std::string id;
  Categorical prior;
  std::vector<bool> valid;
  double z = 0.0;
  std::size_t valid_count = 0;

  [[nodiscard]] TokenConstraint constraint() const { return mask_constraint(valid); }
  /// prior restricted to the valid set and renormalized.
  [[nodiscard]] Categorical posterior() const;
};

/// Dirichlet(1) prior and a Bernoulli(pi) valid set with pi ~ U(0, 1); redrawn until Z > 0.
[[nodiscard]] Instance make_instance(const InstanceSpec& spec, std::size_t index);

/// Valid mass z spread evenly over tokens [0, k) and 1 - z over the other v - k.
[[nodiscard]] bool grid_cell_feasible(double z, std::size_t k, std::size_t v) noexcept;
[[nodiscard]] Instance grid_instance(double z, std::size_t k, std::size_t v);

/// Summary statistics of repeated calls of one weighted sampler.
struct Estimate {
  std::uint64_t runs = 0;
  double mean_zhat = 0.0;
  double var_zhat = 0.0;  ///< unbiased sample variance
  double mean_calls = 0.0;
  double var_calls = 0.0;
  std::uint64_t max_calls = 0;
};

[[nodiscard]] Estimate estimate(const Instance& instance, WeightedSampler sampler, const SamplerConfig& config,
                                std::uint64_t runs, Rng& rng);

struct SweepRow {
  std::string instance_id;
  std::string sampler;
  double z = 0.0;
  std::size_t k = 0;
  std::size_t v = 0;
  unsigned l = 0;
  std::uint64_t n = 0;
  std::string metric;
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::map<std::string, std::vector<double>> grids;
  std::size_t cells = 0;
  std::size_t failed_cells = 0;
  std::size_t skipped_cells = 0;  ///< infeasible, flagged with an "infeasible" row

  [[nodiscard]] double success_rate() const noexcept;
  [[nodiscard]] std::string to_csv() const;
  [[nodiscard]] std::vector<SweepRow> select(const std::string& instance_id, const std::string& sampler,
                                             const std::string& metric) const;
};

inline constexpr const char* kCsvHeader = "instance_id,sampler,Z,K,V,L,N,metric,value,ci_lo,ci_hi";

struct BiasConfig {
  InstanceSpec spec;
  std::size_t instances = 100;
  std::vector<WeightedSampler> samplers{WeightedSampler::kWrs, WeightedSampler::kAwrs};
  std::vector<std::uint64_t> n_grid{100, 1000, 10000};
  std::size_t replicates = 1;  ///< independent estimates per (instance, N); abs error is averaged
  SamplerConfig sampler_config;
  unsigned workers = 1;
};

/// Per instance: mean zhat and abs error of the N-run mean; summary "mae" rows under instance "all".
[[nodiscard]] SweepResult bias_experiment(const BiasConfig& config);

struct VarianceConfig {
  InstanceSpec spec;
  std::size_t instances = 100;
  std::vector<unsigned> l_grid{1, 2, 4, 8};
  std::uint64_t runs = 10000;
  bool include_awrs = true;
  unsigned workers = 1;
};

/// Per instance and L: var and mean of zhat, mean calls and the analytic (L+1)/Z.
[[nodiscard]] SweepResult variance_vs_L(const VarianceConfig& config);

struct HeatmapConfig {
  std::size_t vocab = 1000;
  std::vector<double> z_grid;       ///< empty: default_z_grid()
  std::vector<std::size_t> k_grid;  ///< empty: default_k_grid(vocab, dense)
  bool dense = false;
  std::uint64_t runs = 100;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

/// 20 logit-spaced points in [0.01, 0.99].
[[nodiscard]] std::vector<double> default_z_grid(std::size_t points = 20);
/// Every K in [1, V) when dense; otherwise up to 20 points log-spaced towards both ends.
[[nodiscard]] std::vector<std::size_t> default_k_grid(std::size_t vocab, bool dense);

/// Per cell, mean calls of WRS (L = 1) and AWRS with analytic companions and the AWRS cap V - K + 2.
[[nodiscard]] SweepResult runtime_heatmap(const HeatmapConfig& config);

}  // namespace awrs

#endif
