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

#include <awrs/harness.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include <awrs/analytics.hpp>
#include <awrs/errors.hpp>
#include <awrs/oracle.hpp>
#include <awrs/parallel.hpp>

namespace awrs {

namespace {

constexpr std::uint64_t kInstanceStream = 0x696e7374616e6365ULL;
constexpr std::uint64_t kEstimateStream = 0x657374696d617465ULL;
constexpr std::uint64_t kHeatmapStream = 0x686561746d6170ULL;
constexpr double kZ95 = 1.959963984540054;

struct Welford {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  [[nodiscard]] double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  [[nodiscard]] double half_width() const {
    return n > 1 ? kZ95 * std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

std::uint64_t sampler_tag(WeightedSampler sampler, unsigned l) {
  return (static_cast<std::uint64_t>(sampler) << 32U) | l;
}

Rng estimate_rng(std::uint64_t seed, std::size_t instance, WeightedSampler sampler, unsigned l, std::uint64_t n,
                 std::size_t replicate) {
  return Rng{seed, stream_id(stream_id(kEstimateStream, instance), sampler_tag(sampler, l), stream_id(n, replicate))};
}

SweepRow row_for(const Instance& inst, std::string sampler, unsigned l, std::uint64_t n, std::string metric,
                 double value, double half_width = 0.0) {
  SweepRow r;
  r.instance_id = inst.id;
  r.sampler = std::move(sampler);
  r.z = inst.z;
  r.k = inst.valid_count;
  r.v = inst.prior.vocab_size();
  r.l = l;
  r.n = n;
  r.metric = std::move(metric);
  r.value = value;
  r.ci_lo = value - half_width;
  r.ci_hi = value + half_width;
  return r;
}

SweepRow summary_row(std::string sampler, std::size_t v, unsigned l, std::uint64_t n, std::string metric,
                     double value, double half_width = 0.0) {
  SweepRow r;
  r.instance_id = "all";
  r.sampler = std::move(sampler);
  r.v = v;
  r.l = l;
  r.n = n;
  r.metric = std::move(metric);
  r.value = value;
  r.ci_lo = value - half_width;
  r.ci_hi = value + half_width;
  return r;
}

double median(std::vector<double> xs) {
  if (xs.empty()) {
    return 0.0;
  }
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

Instance finish_instance(std::string id, Categorical prior, std::vector<bool> valid) {
  Instance inst{std::move(id), std::move(prior), std::move(valid), 0.0, 0};
  inst.valid_count = static_cast<std::size_t>(std::count(inst.valid.begin(), inst.valid.end(), true));
  inst.z = token_mask(inst.prior, inst.constraint()).z;
  return inst;
}

void merge(SweepResult& out, std::vector<std::vector<SweepRow>>& parts) {
  for (auto& part : parts) {
    out.rows.insert(out.rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
}

std::string format_double(double x) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.12g", x);
  return buf.data();
}

}  // namespace

Categorical Instance::posterior() const { return token_mask(prior, constraint()).post; }

Instance make_instance(const InstanceSpec& spec, std::size_t index) {
  if (spec.vocab < 1) {
    throw ConfigError("instance vocabulary must be non-empty");
  }
  Rng rng{spec.seed, stream_id(kInstanceStream, index)};
  std::vector<double> weights(spec.vocab, 1.0);
  std::vector<bool> valid(spec.vocab);
  for (;;) {
    if (spec.dirichlet_prior) {
      for (double& w : weights) {
        w = rng.exponential();
      }
    }
    const double pi = rng.uniform();
    bool any = false;
    for (std::size_t i = 0; i < spec.vocab; ++i) {
      valid[i] = rng.bernoulli(pi);
      any = any || (valid[i] && weights[i] > 0.0);
    }
    if (any) {
      break;
    }
  }
  return finish_instance("i" + std::to_string(index), normalize(weights), std::move(valid));
}

bool grid_cell_feasible(double z, std::size_t k, std::size_t v) noexcept {
  if (!(z > 0.0 && z <= 1.0) || k < 1 || k > v) {
    return false;
  }
  return k == v ? z == 1.0 : z < 1.0;
}

Instance grid_instance(double z, std::size_t k, std::size_t v) {
  if (!grid_cell_feasible(z, k, v)) {
    throw std::invalid_argument("infeasible (Z, K, V) cell");
  }
  std::vector<double> weights(v);
  std::vector<bool> valid(v, false);
  for (std::size_t i = 0; i < v; ++i) {
    valid[i] = i < k;
    weights[i] = i < k ? z / static_cast<double>(k) : (1.0 - z) / static_cast<double>(v - k);
  }
  return finish_instance("Z" + format_double(z) + "_K" + std::to_string(k), normalize(weights), std::move(valid));
}

Estimate estimate(const Instance& instance, WeightedSampler sampler, const SamplerConfig& config,
                  std::uint64_t runs, Rng& rng) {
  const TokenConstraint c = instance.constraint();
  Welford zhat;
  Welford calls;
  Estimate out;
  for (std::uint64_t i = 0; i < runs; ++i) {
    const WeightedToken w = sample_weighted(sampler, config, instance.prior, c, rng);
    zhat.add(w.zhat);
    calls.add(static_cast<double>(w.trials));
    out.max_calls = std::max(out.max_calls, w.trials);
  }
  out.runs = runs;
  out.mean_zhat = zhat.mean;
  out.var_zhat = zhat.variance();
  out.mean_calls = calls.mean;
  out.var_calls = calls.variance();
  return out;
}

double SweepResult::success_rate() const noexcept {
  const std::size_t attempted = cells - skipped_cells;
  return attempted == 0 ? 1.0 : 1.0 - static_cast<double>(failed_cells) / static_cast<double>(attempted);
}

std::string SweepResult::to_csv() const {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.instance_id << ',' << r.sampler << ',' << format_double(r.z) << ',' << r.k << ',' << r.v << ',' << r.l
       << ',' << r.n << ',' << r.metric << ',' << format_double(r.value) << ',' << format_double(r.ci_lo) << ','
       << format_double(r.ci_hi) << '\n';
  }
  return os.str();
}

std::vector<SweepRow> SweepResult::select(const std::string& instance_id, const std::string& sampler,
                                          const std::string& metric) const {
  std::vector<SweepRow> out;
  for (const auto& r : rows) {
    if ((instance_id.empty() || r.instance_id == instance_id) && (sampler.empty() || r.sampler == sampler) &&
        r.metric == metric) {
      out.push_back(r);
    }
  }
  return out;
}

SweepResult bias_experiment(const BiasConfig& config) {
  config.sampler_config.validate();
  if (!std::is_sorted(config.n_grid.begin(), config.n_grid.end())) {
    throw ConfigError("bias_experiment: N grid must be ascending");
  }
  if (config.replicates < 1) {
    throw ConfigError("bias_experiment: replicates must be at least 1");
  }
  const unsigned l = config.sampler_config.extra_loops;
  const std::size_t cells_per_instance = config.samplers.size() * config.n_grid.size();
  std::vector<std::vector<SweepRow>> parts(config.instances);
  // errors[instance][sampler][n]
  std::vector<std::vector<double>> errors(config.instances, std::vector<double>(cells_per_instance, -1.0));
  std::vector<std::size_t> failures(config.instances, 0);

  parallel_for(config.instances, config.workers, [&](std::size_t i) {
    const Instance inst = make_instance(config.spec, i);
    for (std::size_t s = 0; s < config.samplers.size(); ++s) {
      const WeightedSampler sampler = config.samplers[s];
      const std::string name{to_string(sampler)};
      for (std::size_t j = 0; j < config.n_grid.size(); ++j) {
        const std::uint64_t n = config.n_grid[j];
        try {
          Welford mean;
          Welford err;
          for (std::size_t r = 0; r < config.replicates; ++r) {
            Rng rng = estimate_rng(config.spec.seed, i, sampler, l, n, r);
            const Estimate e = estimate(inst, sampler, config.sampler_config, n, rng);
            mean.add(e.mean_zhat);
            err.add(std::abs(e.mean_zhat - inst.z));
          }
          parts[i].push_back(row_for(inst, name, l, n, "mean_zhat", mean.mean, mean.half_width()));
          parts[i].push_back(row_for(inst, name, l, n, "abs_error", err.mean, err.half_width()));
          errors[i][s * config.n_grid.size() + j] = err.mean;
        } catch (const Error& e) {
          parts[i].push_back(row_for(inst, name, l, n, "failed", 1.0));
          ++failures[i];
        }
      }
    }
  });

  SweepResult out;
  merge(out, parts);
  out.cells = config.instances * cells_per_instance;
  for (const auto f : failures) {
    out.failed_cells += f;
  }
  for (std::size_t s = 0; s < config.samplers.size(); ++s) {
    const std::string name{to_string(config.samplers[s])};
    for (std::size_t j = 0; j < config.n_grid.size(); ++j) {
      Welford mae;
      std::vector<double> all;
      for (std::size_t i = 0; i < config.instances; ++i) {
        const double e = errors[i][s * config.n_grid.size() + j];
        if (e >= 0.0) {
          mae.add(e);
          all.push_back(e);
        }
      }
      out.rows.push_back(summary_row(name, config.spec.vocab, l, config.n_grid[j], "mae", mae.mean, mae.half_width()));
      out.rows.push_back(summary_row(name, config.spec.vocab, l, config.n_grid[j], "median_abs_error", median(all)));
    }
  }
  out.grids["N"].assign(config.n_grid.begin(), config.n_grid.end());
  return out;
}

SweepResult variance_vs_L(const VarianceConfig& config) {
  for (const auto l : config.l_grid) {
    if (l < 1) {
      throw ConfigError("variance_vs_L: L must be at least 1");
    }
  }
  struct Cell {
    WeightedSampler sampler;
    unsigned l;
  };
  std::vector<Cell> cells;
  for (const auto l : config.l_grid) {
    cells.push_back({WeightedSampler::kWrs, l});
  }
  if (config.include_awrs) {
    cells.push_back({WeightedSampler::kAwrs, 1});
  }
  std::vector<std::vector<SweepRow>> parts(config.instances);
  std::vector<std::vector<double>> variances(config.instances, std::vector<double>(cells.size(), -1.0));
  std::vector<std::size_t> failures(config.instances, 0);

  parallel_for(config.instances, config.workers, [&](std::size_t i) {
    const Instance inst = make_instance(config.spec, i);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto [sampler, l] = cells[c];
      const std::string name{to_string(sampler)};
      SamplerConfig sc;
      sc.extra_loops = l;
      try {
        Rng rng = estimate_rng(config.spec.seed, i, sampler, l, config.runs, 0);
        const Estimate e = estimate(inst, sampler, sc, config.runs, rng);
        const double calls_hw = kZ95 * std::sqrt(e.var_calls / static_cast<double>(e.runs));
        const double expected = sampler == WeightedSampler::kWrs
                                    ? wrs_expected_calls(inst.z, l)
                                    : awrs_expected_calls(inst.prior.probs(), inst.valid, l).expected_calls;
        parts[i].push_back(row_for(inst, name, l, config.runs, "mean_zhat", e.mean_zhat));
        parts[i].push_back(row_for(inst, name, l, config.runs, "var_zhat", e.var_zhat));
        parts[i].push_back(row_for(inst, name, l, config.runs, "mean_calls", e.mean_calls, calls_hw));
        parts[i].push_back(row_for(inst, name, l, config.runs, "expected_calls", expected));
        variances[i][c] = e.var_zhat;
      } catch (const Error&) {
        parts[i].push_back(row_for(inst, name, l, config.runs, "failed", 1.0));
        ++failures[i];
      }
    }
  });

  SweepResult out;
  merge(out, parts);
  out.cells = config.instances * cells.size();
  for (const auto f : failures) {
    out.failed_cells += f;
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> all;
    for (std::size_t i = 0; i < config.instances; ++i) {
      if (variances[i][c] >= 0.0) {
        all.push_back(variances[i][c]);
      }
    }
    out.rows.push_back(summary_row(std::string{to_string(cells[c].sampler)}, config.spec.vocab, cells[c].l,
                                   config.runs, "median_var_zhat", median(all)));
  }
  out.grids["L"].assign(config.l_grid.begin(), config.l_grid.end());
  return out;
}

std::vector<double> default_z_grid(std::size_t points) {
  std::vector<double> out;
  const double edge = std::log(99.0);
  for (std::size_t j = 0; j < points; ++j) {
    const double t = points == 1 ? 0.0 : -edge + 2.0 * edge * static_cast<double>(j) / static_cast<double>(points - 1);
    out.push_back(1.0 / (1.0 + std::exp(-t)));
  }
  return out;
}

std::vector<std::size_t> default_k_grid(std::size_t vocab, bool dense) {
  if (vocab < 2) {
    throw ConfigError("heatmap vocabulary must have at least two tokens");
  }
  std::set<std::size_t> ks;
  if (dense || vocab <= 21) {
    for (std::size_t k = 1; k < vocab; ++k) {
      ks.insert(k);
    }
  } else {
    const double half = static_cast<double>(vocab) / 2.0;
    constexpr int kSide = 10;
    for (int j = 0; j < kSide; ++j) {
      const auto k = static_cast<std::size_t>(std::lround(std::pow(half, static_cast<double>(j) / (kSide - 1))));
      ks.insert(std::clamp<std::size_t>(k, 1, vocab - 1));
      ks.insert(std::clamp<std::size_t>(vocab - k, 1, vocab - 1));
    }
  }
  return {ks.begin(), ks.end()};
}

SweepResult runtime_heatmap(const HeatmapConfig& config) {
  const std::vector<double> zs = config.z_grid.empty() ? default_z_grid() : config.z_grid;
  const std::vector<std::size_t> ks = config.k_grid.empty() ? default_k_grid(config.vocab, config.dense) : config.k_grid;
  const std::size_t v = config.vocab;
  const std::size_t cells = zs.size() * ks.size();
  std::vector<std::vector<SweepRow>> parts(cells);
  std::vector<char> skipped(cells, 0);
  std::vector<char> failed(cells, 0);

  parallel_for(cells, config.workers, [&](std::size_t cell) {
    const double z = zs[cell / ks.size()];
    const std::size_t k = ks[cell % ks.size()];
    if (!grid_cell_feasible(z, k, v)) {
      SweepRow r;
      r.instance_id = "Z" + format_double(z) + "_K" + std::to_string(k);
      r.sampler = "-";
      r.z = z;
      r.k = k;
      r.v = v;
      r.n = config.runs;
      r.metric = "infeasible";
      r.value = r.ci_lo = r.ci_hi = 1.0;
      parts[cell].push_back(r);
      skipped[cell] = 1;
      return;
    }
    const Instance inst = grid_instance(z, k, v);
    const SamplerConfig sc;
    try {
      for (const auto sampler : {WeightedSampler::kWrs, WeightedSampler::kAwrs}) {
        Rng rng{config.seed, stream_id(kHeatmapStream, cell, sampler_tag(sampler, 1))};
        const Estimate e = estimate(inst, sampler, sc, config.runs, rng);
        const std::string name{to_string(sampler)};
        const double hw = kZ95 * std::sqrt(e.var_calls / static_cast<double>(e.runs));
        const double sd = std::sqrt(e.var_calls / static_cast<double>(e.runs));
        parts[cell].push_back(row_for(inst, name, 1, config.runs, "mean_calls", e.mean_calls, hw));
        parts[cell].push_back(row_for(inst, name, 1, config.runs, "mc_stderr", sd));
        if (sampler == WeightedSampler::kWrs) {
          parts[cell].push_back(row_for(inst, name, 1, config.runs, "analytic_calls", wrs_expected_calls(z, 1)));
        } else {
          parts[cell].push_back(
              row_for(inst, name, 1, config.runs, "analytic_calls", awrs_expected_calls_grouped(inst.z, k, v, 1)));
          parts[cell].push_back(row_for(inst, name, 1, config.runs, "max_calls", static_cast<double>(e.max_calls)));
          parts[cell].push_back(row_for(inst, name, 1, config.runs, "cap", static_cast<double>(v - k + 2)));
        }
      }
    } catch (const Error&) {
      parts[cell].clear();
      parts[cell].push_back(row_for(inst, "-", 1, config.runs, "failed", 1.0));
      failed[cell] = 1;
    }
  });

  SweepResult out;
  merge(out, parts);
  out.cells = cells;
  out.skipped_cells = static_cast<std::size_t>(std::count(skipped.begin(), skipped.end(), 1));
  out.failed_cells = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  out.grids["Z"] = zs;
  out.grids["K"].assign(ks.begin(), ks.end());
  return out;
}

}  // namespace awrs
