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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include <awrs/analytics.hpp>
#include <awrs/errors.hpp>
#include <awrs/harness.hpp>

namespace {

using awrs::WeightedSampler;

double only_value(const awrs::SweepResult& r, const std::string& id, const std::string& sampler,
                  const std::string& metric, std::uint64_t n) {
  for (const auto& row : r.select(id, sampler, metric)) {
    if (row.n == n) {
      return row.value;
    }
  }
  ADD_FAILURE() << "missing row " << id << ' ' << sampler << ' ' << metric << ' ' << n;
  return 0.0;
}

TEST(Instances, Properties) {
  const awrs::InstanceSpec spec{200, true, 5};
  for (std::size_t i = 0; i < 50; ++i) {
    const auto inst = awrs::make_instance(spec, i);
    EXPECT_EQ(inst.id, "i" + std::to_string(i));
    EXPECT_GT(inst.z, 0.0);
    EXPECT_EQ(inst.prior.vocab_size(), 200U);
    double z = 0.0;
    std::size_t k = 0;
    for (std::size_t t = 0; t < 200; ++t) {
      z += inst.valid[t] ? inst.prior[t] : 0.0;
      k += inst.valid[t];
    }
    EXPECT_NEAR(inst.z, z, 1e-12);
    EXPECT_EQ(inst.valid_count, k);
    const auto again = awrs::make_instance(spec, i);
    EXPECT_EQ(again.valid, inst.valid);
    EXPECT_EQ(again.prior, inst.prior);
  }
  EXPECT_NE(awrs::make_instance(spec, 0).valid, awrs::make_instance(spec, 1).valid);
  const auto uniform = awrs::make_instance({10, false, 1}, 0);
  EXPECT_DOUBLE_EQ(uniform.prior[3], 0.1);
}

TEST(Instances, GridCells) {
  EXPECT_TRUE(awrs::grid_cell_feasible(0.3, 2, 10));
  EXPECT_FALSE(awrs::grid_cell_feasible(0.3, 10, 10));
  EXPECT_TRUE(awrs::grid_cell_feasible(1.0, 10, 10));
  EXPECT_FALSE(awrs::grid_cell_feasible(1.0, 3, 10));
  EXPECT_FALSE(awrs::grid_cell_feasible(0.0, 3, 10));
  EXPECT_FALSE(awrs::grid_cell_feasible(0.5, 0, 10));
  const auto g = awrs::grid_instance(0.3, 3, 10);
  EXPECT_NEAR(g.z, 0.3, 1e-15);
  EXPECT_EQ(g.valid_count, 3U);
  EXPECT_NEAR(g.prior[0], 0.1, 1e-15);
  EXPECT_NEAR(g.prior[9], 0.1, 1e-15);
  EXPECT_THROW((void)awrs::grid_instance(0.3, 10, 10), std::invalid_argument);
}

TEST(Estimate, ExactSamplerHasNoError) {
  const auto inst = awrs::make_instance({50, true, 2}, 0);
  awrs::Rng rng{3};
  const auto e = awrs::estimate(inst, WeightedSampler::kExact, {}, 100, rng);
  EXPECT_NEAR(e.mean_zhat, inst.z, 1e-12);
  EXPECT_NEAR(e.var_zhat, 0.0, 1e-20);
  EXPECT_DOUBLE_EQ(e.mean_calls, 50.0);
  EXPECT_EQ(e.max_calls, 50U);
}

TEST(Bias, SmokeAndExactOracle) {
  awrs::BiasConfig config;
  config.spec = {10, true, 4};
  config.instances = 3;
  config.samplers = {WeightedSampler::kWrs, WeightedSampler::kAwrs, WeightedSampler::kExact};
  config.n_grid = {10};
  const auto r = awrs::bias_experiment(config);
  EXPECT_EQ(r.cells, 9U);
  EXPECT_EQ(r.failed_cells, 0U);
  EXPECT_DOUBLE_EQ(r.success_rate(), 1.0);
  EXPECT_NEAR(only_value(r, "all", "exact", "mae", 10), 0.0, 1e-12);
  EXPECT_EQ(r.select("", "wrs", "abs_error").size(), 3U);
}

TEST(Bias, ErrorShrinksWithN) {
  awrs::BiasConfig config;
  config.spec = {100, true, 6};
  config.instances = 20;
  config.replicates = 10;
  const auto r = awrs::bias_experiment(config);
  for (const std::string s : {"wrs", "awrs"}) {
    int shrank = 0;
    for (std::size_t i = 0; i < config.instances; ++i) {
      const std::string id = "i" + std::to_string(i);
      shrank += only_value(r, id, s, "abs_error", 10000) < only_value(r, id, s, "abs_error", 100);
    }
    EXPECT_GE(shrank, 19) << s;
    EXPECT_LT(only_value(r, "all", s, "median_abs_error", 10000), only_value(r, "all", s, "median_abs_error", 1000));
    EXPECT_LT(only_value(r, "all", s, "median_abs_error", 1000), only_value(r, "all", s, "median_abs_error", 100));
  }
}

TEST(Bias, RejectsUnsortedGrid) {
  awrs::BiasConfig config;
  config.n_grid = {100, 10};
  EXPECT_THROW((void)awrs::bias_experiment(config), awrs::ConfigError);
}

TEST(Variance, NonIncreasingInLAndMatchesBias) {
  awrs::VarianceConfig config;
  config.spec = {100, true, 7};
  config.instances = 20;
  config.runs = 2000;
  const auto r = awrs::variance_vs_L(config);
  EXPECT_EQ(r.failed_cells, 0U);
  double previous = INFINITY;
  for (const auto& row : r.select("all", "wrs", "median_var_zhat")) {
    EXPECT_LE(row.value, previous) << "L=" << row.l;
    previous = row.value;
  }
  EXPECT_EQ(r.select("all", "awrs", "median_var_zhat").size(), 1U);
  for (const auto& row : r.select("i0", "wrs", "expected_calls")) {
    EXPECT_DOUBLE_EQ(row.value, (row.l + 1.0) / row.z);
  }

  awrs::BiasConfig bias;
  bias.spec = config.spec;
  bias.instances = config.instances;
  bias.samplers = {WeightedSampler::kWrs};
  bias.n_grid = {config.runs};
  const auto b = awrs::bias_experiment(bias);
  for (std::size_t i = 0; i < config.instances; ++i) {
    const std::string id = "i" + std::to_string(i);
    double var_l1 = 0.0;
    for (const auto& row : r.select(id, "wrs", "mean_zhat")) {
      if (row.l == 1) {
        var_l1 = row.value;
      }
    }
    EXPECT_EQ(var_l1, only_value(b, id, "wrs", "mean_zhat", config.runs)) << id;
  }
}

TEST(Heatmap, Grids) {
  const auto z = awrs::default_z_grid();
  ASSERT_EQ(z.size(), 20U);
  EXPECT_NEAR(z.front(), 0.01, 1e-12);
  EXPECT_NEAR(z.back(), 0.99, 1e-12);
  for (std::size_t i = 0; i < z.size(); ++i) {
    EXPECT_NEAR(z[i] + z[z.size() - 1 - i], 1.0, 1e-12);
    if (i > 0) {
      EXPECT_GT(z[i], z[i - 1]);
    }
  }
  const auto dense = awrs::default_k_grid(10, true);
  EXPECT_EQ(dense.size(), 9U);
  const auto sparse = awrs::default_k_grid(1000, false);
  EXPECT_EQ(sparse.front(), 1U);
  EXPECT_EQ(sparse.back(), 999U);
  EXPECT_LE(sparse.size(), 20U);
  EXPECT_TRUE(std::is_sorted(sparse.begin(), sparse.end()));
}

TEST(Heatmap, DenseTenTokenTiling) {
  awrs::HeatmapConfig config;
  config.vocab = 10;
  config.dense = true;
  config.runs = 2000;
  config.seed = 8;
  const auto r = awrs::runtime_heatmap(config);
  EXPECT_EQ(r.cells, 20U * 9U);
  EXPECT_EQ(r.failed_cells, 0U);
  std::size_t within = 0;
  std::size_t total = 0;
  for (const auto& row : r.select("", "awrs", "max_calls")) {
    EXPECT_LE(row.value, static_cast<double>(row.v - row.k + 2));
  }
  for (const std::string s : {"wrs", "awrs"}) {
    const auto means = r.select("", s, "mean_calls");
    const auto errs = r.select("", s, "mc_stderr");
    const auto analytic = r.select("", s, "analytic_calls");
    ASSERT_EQ(means.size(), analytic.size());
    ASSERT_EQ(means.size(), errs.size());
    for (std::size_t i = 0; i < means.size(); ++i) {
      ++total;
      within += std::abs(means[i].value - analytic[i].value) <= 4.0 * errs[i].value + 1.0 / config.runs + 1e-12;
    }
  }
  EXPECT_GE(static_cast<double>(within), 0.99 * static_cast<double>(total));
}

TEST(Heatmap, InfeasibleCellsAreFlagged) {
  awrs::HeatmapConfig config;
  config.vocab = 10;
  config.z_grid = {0.5, 1.0};
  config.k_grid = {3, 10};
  config.runs = 10;
  const auto r = awrs::runtime_heatmap(config);
  EXPECT_EQ(r.cells, 4U);
  EXPECT_EQ(r.skipped_cells, 2U);
  EXPECT_EQ(r.select("", "-", "infeasible").size(), 2U);
}

TEST(Sweeps, CsvIsDeterministicAcrossWorkers) {
  awrs::HeatmapConfig config;
  config.vocab = 30;
  config.runs = 50;
  config.seed = 9;
  const auto a = awrs::runtime_heatmap(config).to_csv();
  config.workers = 3;
  const auto b = awrs::runtime_heatmap(config).to_csv();
  EXPECT_EQ(a, b);
  std::istringstream in{a};
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, awrs::kCsvHeader);

  awrs::BiasConfig bias;
  bias.spec = {40, true, 10};
  bias.instances = 6;
  bias.n_grid = {20, 200};
  const auto c = awrs::bias_experiment(bias).to_csv();
  bias.workers = 4;
  EXPECT_EQ(c, awrs::bias_experiment(bias).to_csv());
}

}  // namespace
