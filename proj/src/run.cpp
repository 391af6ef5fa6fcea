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

#include <awrs/run.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string_view>

#include <CLI11.hpp>

#include <awrs/constraints.hpp>
#include <awrs/errors.hpp>
#include <awrs/harness.hpp>
#include <awrs/parallel.hpp>
#include <awrs/samplers.hpp>
#include <awrs/smc.hpp>
#include <awrs/toylm.hpp>

namespace awrs::cli {

namespace {

using nlohmann::json;

constexpr std::string_view kVersion = "awrs 0.1.0";
constexpr std::uint64_t kLcdStream = 0x6c6364ULL;

const std::vector<std::string>& methods() {
  static const std::vector<std::string> all{"lm",           "lcd-mask",  "lcd-ars", "sample-verify",
                                            "smc-twist",    "smc-awrs",  "is"};
  return all;
}

bool is_smc(const std::string& method) { return method == "smc-twist" || method == "smc-awrs"; }

template <class T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key)) {
    field = j.at(key).get<T>();
  }
}

template <class T>
void take(const json& j, const char* key, std::optional<T>& field) {
  if (j.contains(key)) {
    field = j.at(key).get<T>();
  }
}

ToyLM load_model(const std::string& model) {
  if (model == "example-a1") {
    return ToyLM::two_symbol();
  }
  return ToyLM::load(model);
}

struct BoundConstraint {
  IncrementalConstraint constraint = IncrementalConstraint::vacuous();
  bool constrained = false;
};

BoundConstraint load_constraint(const GenerateConfig& config, const Vocabulary& vocab) {
  const bool literal = !config.language.empty() && config.language != "vacuous";
  const int given = int{literal} + int{!config.trie_path.empty()} + int{!config.dfa_path.empty()};
  if (given > 1) {
    throw ConfigError("give at most one of --language, --trie and --dfa");
  }
  BoundConstraint out;
  out.constrained = given == 1;
  if (literal) {
    out.constraint = TrieLanguage::parse_literal(config.language, vocab).constraint();
  } else if (!config.trie_path.empty()) {
    out.constraint = TrieLanguage::load(config.trie_path, vocab).constraint();
  } else if (!config.dfa_path.empty()) {
    out.constraint = DfaPattern::load(config.dfa_path, vocab).constraint();
  }
  return out;
}

SamplerConfig sampler_config(const GenerateConfig& config) {
  SamplerConfig sc;
  sc.extra_loops = config.extra_loops.value_or(sc.extra_loops);
  sc.theta0 = config.theta0.value_or(sc.theta0);
  sc.theta1 = config.theta1.value_or(sc.theta1);
  sc.budget = config.budget.value_or(sc.budget);
  sc.top_p = config.top_p;
  sc.lookahead = config.lookahead.value_or(sc.lookahead);
  return sc;
}

SmcConfig smc_config(const GenerateConfig& config) {
  SmcConfig sc;
  sc.num_particles = config.num_particles;
  sc.tau = config.tau.value_or(sc.tau);
  sc.seed = config.seed;
  sc.max_steps = config.max_steps;
  sc.workers = config.workers;
  if (config.resampling) {
    sc.resampling = *parse_resampling(*config.resampling);
  }
  return sc;
}

json ensemble_json(const Ensemble& e, const Vocabulary& vocab, bool weighted) {
  json out;
  out["g_hat"] = weighted ? json(e.g_hat) : json(nullptr);
  json posterior = json::object();
  for (const auto& [tokens, p] : e.posterior_estimate) {
    posterior[vocab.detokenize(tokens)] = p;
  }
  out["posterior_estimate"] = posterior;
  std::map<std::string, std::pair<std::size_t, double>> groups;
  for (const auto& particle : e.particles) {
    auto& g = groups[particle.complete ? vocab.detokenize(particle.prefix) : vocab.detokenize(particle.prefix) + "..."];
    ++g.first;
    g.second += particle.weight;
  }
  json ensemble = json::object();
  for (const auto& [s, g] : groups) {
    ensemble[s] = {{"count", g.first}, {"weight", g.second}};
  }
  out["ensemble"] = ensemble;
  out["eval_counts"] = {{"total", e.total_evals}, {"per_step", e.evals_per_step}};
  out["resample_count"] = e.resample_count;
  return out;
}

json lcd_json(const ToyLM& lm, const IncrementalConstraint& constraint, const GenerateConfig& config) {
  const LcdSampler sampler = config.method == "lcd-ars" ? LcdSampler::kArs : LcdSampler::kTokenMask;
  std::vector<TokenString> strings(config.num_particles);
  std::vector<std::uint64_t> evals(config.num_particles, 0);
  parallel_for(config.num_particles, config.workers, [&](std::size_t i) {
    Rng rng{config.seed, stream_id(kLcdStream, i)};
    strings[i] = lcd_generate(lm, constraint, sampler, rng, &evals[i]);
  });
  std::map<std::string, std::size_t> counts;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < strings.size(); ++i) {
    ++counts[lm.vocab().detokenize(strings[i])];
    total += evals[i];
  }
  json out;
  out["g_hat"] = nullptr;
  json posterior = json::object();
  json ensemble = json::object();
  for (const auto& [s, c] : counts) {
    posterior[s] = static_cast<double>(c) / static_cast<double>(config.num_particles);
    ensemble[s] = {{"count", c}, {"weight", static_cast<double>(c)}};
  }
  out["posterior_estimate"] = posterior;
  out["ensemble"] = ensemble;
  out["eval_counts"] = {{"total", total}, {"per_step", json::array()}};
  out["resample_count"] = 0;
  return out;
}

int exit_code_for(const Error& e) {
  const std::string_view kind = e.kind();
  if (kind == "ConfigError" || kind == "EnumerationLimit" || kind == "PrefixTooLong") {
    return kExitConfig;
  }
  return kExitInference;
}

void emit_error(std::ostream& err, std::string_view kind, std::string_view message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream file{path, std::ios::binary};
  if (!file) {
    throw ConfigError("cannot write " + path.string());
  }
  file << text;
  if (!file) {
    throw ConfigError("failed writing " + path.string());
  }
}

std::filesystem::path default_output_dir() {
  const char* env = std::getenv("AWRS_OUTPUT_DIR");
  return env != nullptr && *env != '\0' ? std::filesystem::path{env} : std::filesystem::path{"."};
}

int finish_experiment(const std::string& name, const SweepResult& result, json metadata,
                      const std::filesystem::path& dir, std::ostream& out) {
  const auto csv = dir / (name + ".csv");
  const auto meta = dir / (name + ".meta.json");
  metadata["experiment"] = name;
  metadata["version"] = kVersion;
  metadata["csv_schema"] = kCsvHeader;
  metadata["grids"] = result.grids;
  metadata["cells"] = result.cells;
  metadata["failed_cells"] = result.failed_cells;
  metadata["skipped_cells"] = result.skipped_cells;
  write_text(csv, result.to_csv());
  write_text(meta, metadata.dump(2) + "\n");
  const double rate = result.success_rate();
  out << json{{"csv", csv.string()}, {"metadata", meta.string()}, {"success_rate", rate}}.dump() << '\n';
  return rate >= 0.99 ? kExitOk : kExitInference;
}

std::vector<WeightedSampler> parse_samplers(const std::vector<std::string>& names) {
  std::vector<WeightedSampler> out;
  for (const auto& n : names) {
    const auto s = parse_weighted_sampler(n);
    if (!s) {
      throw ConfigError("unknown sampler '" + n + "'");
    }
    out.push_back(*s);
  }
  return out;
}

}  // namespace

GenerateConfig parse_run_descriptor(const json& d) {
  if (!d.is_object()) {
    throw ConfigError("run descriptor must be a JSON object");
  }
  GenerateConfig c;
  try {
    take(d, "model", c.model);
    take(d, "language", c.language);
    take(d, "trie", c.trie_path);
    take(d, "pattern", c.dfa_path);
    take(d, "dfa", c.dfa_path);
    take(d, "method", c.method);
    take(d, "sampler", c.sampler);
    take(d, "L", c.extra_loops);
    take(d, "theta0", c.theta0);
    take(d, "theta1", c.theta1);
    take(d, "R", c.budget);
    take(d, "top_p", c.top_p);
    take(d, "lookahead", c.lookahead);
    take(d, "N", c.num_particles);
    take(d, "tau", c.tau);
    take(d, "resampling", c.resampling);
    take(d, "seed", c.seed);
    take(d, "max_steps", c.max_steps);
    take(d, "workers", c.workers);
    take(d, "out", c.out);
  } catch (const json::exception& e) {
    throw ConfigError(std::string{"bad run descriptor: "} + e.what());
  }
  return c;
}

void validate(const GenerateConfig& c) {
  if (std::find(methods().begin(), methods().end(), c.method) == methods().end()) {
    throw ConfigError("unknown method '" + c.method + "'");
  }
  const bool pwp = c.method == "smc-awrs";
  const auto sampler = parse_weighted_sampler(c.sampler.value_or("awrs"));
  if (!sampler) {
    throw ConfigError("unknown sampler '" + *c.sampler + "'");
  }
  const auto require = [](bool ok, const std::string& message) {
    if (!ok) {
      throw ConfigError(message);
    }
  };
  require(pwp || !c.sampler, "--sampler applies only to smc-awrs");
  require(pwp || !c.top_p, "--top-p applies only to smc-awrs");
  const bool uses_l = *sampler == WeightedSampler::kWrs || *sampler == WeightedSampler::kCwrs ||
                      *sampler == WeightedSampler::kGawrs;
  const bool uses_r = *sampler == WeightedSampler::kCwrs || *sampler == WeightedSampler::kGawrs ||
                      *sampler == WeightedSampler::kRawrs;
  const bool uses_theta = *sampler == WeightedSampler::kCawrs;
  const std::string name{to_string(*sampler)};
  require(!c.extra_loops || (pwp && uses_l), "--L applies only to smc-awrs with wrs, cwrs or gawrs, not " + name);
  require(!c.budget || (pwp && uses_r), "--R applies only to smc-awrs with cwrs, gawrs or rawrs, not " + name);
  require((!c.theta0 && !c.theta1) || (pwp && uses_theta), "--theta0/--theta1 apply only to smc-awrs with cawrs");
  require(!c.lookahead || (pwp && *sampler == WeightedSampler::kAwrsSorted),
          "--lookahead applies only to smc-awrs with awrs-sorted");
  require((!c.tau && !c.resampling) || is_smc(c.method), "--tau and --resampling apply only to SMC methods");
  require(!c.resampling || parse_resampling(*c.resampling).has_value(), "unknown resampling scheme");
  const bool unconstrained = (c.language.empty() || c.language == "vacuous") && c.trie_path.empty() && c.dfa_path.empty();
  require(c.method != "lm" || unconstrained, "method lm takes no constraint");
  require(c.workers >= 1, "--workers must be at least 1");
  sampler_config(c).validate();
  if (c.method != "lcd-mask" && c.method != "lcd-ars") {
    smc_config(c).validate();
  }
  require(c.num_particles >= 1, "--n must be at least 1");
}

json run_generate(const GenerateConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  const ToyLM lm = load_model(config.model);
  const BoundConstraint bound = load_constraint(config, lm.vocab());
  const IncrementalConstraint& constraint = bound.constraint;
  const SmcConfig smc = smc_config(config);
  json out;
  if (config.method == "lm") {
    out = ensemble_json(sample_lm(lm, smc), lm.vocab(), true);
  } else if (config.method == "lcd-mask" || config.method == "lcd-ars") {
    out = lcd_json(lm, constraint, config);
  } else if (config.method == "sample-verify") {
    const Token eos = lm.eos();
    const StringPredicate verifier = [&](std::span<const Token> s) { return constraint.accepts_string(s, eos); };
    out = ensemble_json(sample_verify(lm, verifier, smc), lm.vocab(), true);
  } else if (config.method == "smc-twist") {
    out = ensemble_json(smc_twist(lm, constraint, smc), lm.vocab(), true);
  } else if (config.method == "is") {
    out = ensemble_json(importance_sample(lm, constraint, smc), lm.vocab(), true);
  } else {
    const WeightedSampler sampler = *parse_weighted_sampler(config.sampler.value_or("awrs"));
    out = ensemble_json(smc_pwp(lm, constraint, sampler, sampler_config(config), smc), lm.vocab(), true);
    out["sampler"] = to_string(sampler);
  }
  out["method"] = config.method;
  out["num_particles"] = config.num_particles;
  out["seed"] = config.seed;
  out["constrained"] = bound.constrained;
  out["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted rejection samplers and SMC for constrained generation", "awrs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string{kVersion});

  GenerateConfig gen;
  std::string config_path;
  auto* generate = app.add_subcommand("generate", "sample strings from a model under a constraint");
  generate->add_option("--config", config_path, "run descriptor JSON; flags override it");
  auto* o_model = generate->add_option("--model", gen.model, "example-a1 or a model JSON path");
  auto* o_language = generate->add_option("--language", gen.language, "literal language such as {aa,ba}");
  auto* o_trie = generate->add_option("--trie", gen.trie_path, "file with one string per line");
  auto* o_dfa = generate->add_option("--dfa", gen.dfa_path, "DFA pattern JSON");
  auto* o_method = generate->add_option("--method", gen.method, "lm|lcd-mask|lcd-ars|sample-verify|smc-twist|smc-awrs|is");
  std::string sampler;
  unsigned l = 1;
  double theta0 = 0.0;
  double theta1 = 0.0;
  std::uint64_t budget = 0;
  double top_p = 1.0;
  unsigned lookahead = 1;
  double tau = 0.5;
  std::string resampling;
  auto* o_sampler = generate->add_option("--sampler", sampler, "weighted sampler for smc-awrs");
  auto* o_l = generate->add_option("--L", l, "extra loops");
  auto* o_theta0 = generate->add_option("--theta0", theta0, "cawrs first threshold");
  auto* o_theta1 = generate->add_option("--theta1", theta1, "cawrs second threshold");
  auto* o_r = generate->add_option("--R", budget, "rejection budget");
  auto* o_top_p = generate->add_option("--top-p", top_p, "nucleus truncation of the prior");
  auto* o_lookahead = generate->add_option("--lookahead", lookahead, "awrs-sorted evaluation window");
  auto* o_n = generate->add_option("--n", gen.num_particles, "particles or samples");
  auto* o_tau = generate->add_option("--tau", tau, "ESS resampling threshold as a fraction of N");
  auto* o_resampling = generate->add_option("--resampling", resampling, "stratified|multinomial");
  auto* o_seed = generate->add_option("--seed", gen.seed, "random seed");
  auto* o_max_steps = generate->add_option("--max-steps", gen.max_steps, "step cutoff");
  auto* o_workers = generate->add_option("--workers", gen.workers, "worker threads");
  auto* o_out = generate->add_option("--out", gen.out, "result path (stdout when absent)");

  auto* experiment = app.add_subcommand("experiment", "simulation sweeps written as CSV");
  experiment->require_subcommand(1);
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--workers", workers, "worker threads");
    sub->add_option("--out-dir", out_dir, "output directory (default $AWRS_OUTPUT_DIR or .)");
  };
  BiasConfig bias;
  std::vector<std::string> bias_samplers{"wrs", "awrs"};
  auto* bias_cmd = experiment->add_subcommand("bias", "MAE of the Z estimate against N");
  bias_cmd->add_option("--vocab", bias.spec.vocab, "vocabulary size");
  bias_cmd->add_option("--instances", bias.instances, "random instances");
  bias_cmd->add_option("--samplers", bias_samplers, "weighted samplers")->delimiter(',');
  bias_cmd->add_option("--n-grid", bias.n_grid, "ascending sample counts")->delimiter(',');
  bias_cmd->add_option("--replicates", bias.replicates, "estimates per instance and N");
  bias_cmd->add_option("--L", bias.sampler_config.extra_loops, "extra loops");
  common(bias_cmd);

  VarianceConfig variance;
  bool no_awrs = false;
  auto* variance_cmd = experiment->add_subcommand("variance", "variance and calls of WRS against L");
  variance_cmd->add_option("--vocab", variance.spec.vocab, "vocabulary size");
  variance_cmd->add_option("--instances", variance.instances, "random instances");
  variance_cmd->add_option("--L-grid", variance.l_grid, "values of L")->delimiter(',');
  variance_cmd->add_option("--runs", variance.runs, "sampler calls per point");
  variance_cmd->add_flag("--no-awrs", no_awrs, "omit the AWRS reference point");
  common(variance_cmd);

  HeatmapConfig heatmap;
  std::size_t z_points = 20;
  auto* heatmap_cmd = experiment->add_subcommand("heatmap", "runtime over (Z, K) cells");
  heatmap_cmd->add_option("--vocab", heatmap.vocab, "vocabulary size");
  heatmap_cmd->add_flag("--dense", heatmap.dense, "every K in [1, V)");
  heatmap_cmd->add_option("--runs", heatmap.runs, "runs per cell");
  heatmap_cmd->add_option("--z-points", z_points, "logit-spaced Z values");
  common(heatmap_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "ConfigError", e.what());
    return kExitConfig;
  }

  try {
    if (generate->parsed()) {
      GenerateConfig config;
      if (!config_path.empty()) {
        std::ifstream file{config_path};
        if (!file) {
          throw ConfigError("cannot read " + config_path);
        }
        json descriptor;
        try {
          file >> descriptor;
        } catch (const json::exception& e) {
          throw ConfigError(std::string{"bad run descriptor: "} + e.what());
        }
        config = parse_run_descriptor(descriptor);
      }
      const auto given = [](const CLI::Option* o) { return o->count() > 0; };
      if (given(o_model)) config.model = gen.model;
      if (given(o_language)) config.language = gen.language;
      if (given(o_trie)) config.trie_path = gen.trie_path;
      if (given(o_dfa)) config.dfa_path = gen.dfa_path;
      if (given(o_method)) config.method = gen.method;
      if (given(o_sampler)) config.sampler = sampler;
      if (given(o_l)) config.extra_loops = l;
      if (given(o_theta0)) config.theta0 = theta0;
      if (given(o_theta1)) config.theta1 = theta1;
      if (given(o_r)) config.budget = budget;
      if (given(o_top_p)) config.top_p = top_p;
      if (given(o_lookahead)) config.lookahead = lookahead;
      if (given(o_n)) config.num_particles = gen.num_particles;
      if (given(o_tau)) config.tau = tau;
      if (given(o_resampling)) config.resampling = resampling;
      if (given(o_seed)) config.seed = gen.seed;
      if (given(o_max_steps)) config.max_steps = gen.max_steps;
      if (given(o_workers)) config.workers = gen.workers;
      if (given(o_out)) config.out = gen.out;

      const json result = run_generate(config);
      if (config.out.empty()) {
        out << result.dump(2) << '\n';
      } else {
        write_text(config.out, result.dump(2) + "\n");
      }
      return kExitOk;
    }

    const std::filesystem::path dir = out_dir.empty() ? default_output_dir() : std::filesystem::path{out_dir};
    if (bias_cmd->parsed()) {
      bias.spec.seed = seed;
      bias.workers = workers;
      bias.samplers = parse_samplers(bias_samplers);
      const SweepResult result = bias_experiment(bias);
      json meta{{"seed", seed},           {"vocab", bias.spec.vocab},       {"instances", bias.instances},
                {"samplers", bias_samplers}, {"replicates", bias.replicates}, {"L", bias.sampler_config.extra_loops}};
      return finish_experiment("bias", result, meta, dir, out);
    }
    if (variance_cmd->parsed()) {
      variance.spec.seed = seed;
      variance.workers = workers;
      variance.include_awrs = !no_awrs;
      const SweepResult result = variance_vs_L(variance);
      json meta{{"seed", seed},
                {"vocab", variance.spec.vocab},
                {"instances", variance.instances},
                {"runs", variance.runs},
                {"include_awrs", variance.include_awrs}};
      return finish_experiment("variance", result, meta, dir, out);
    }
    heatmap.seed = seed;
    heatmap.workers = workers;
    heatmap.z_grid = default_z_grid(z_points);
    const SweepResult result = runtime_heatmap(heatmap);
    json meta{{"seed", seed},
              {"vocab", heatmap.vocab},
              {"dense", heatmap.dense},
              {"runs", heatmap.runs},
              {"z_spacing", "logit-uniform on [0.01, 0.99]"},
              {"k_spacing", heatmap.dense ? "every K in [1, V)" : "log-spaced towards K = 1 and K = V - 1"}};
    return finish_experiment(heatmap.dense ? "heatmap_dense" : "heatmap", result, meta, dir, out);
  } catch (const Error& e) {
    emit_error(err, e.kind(), e.what());
    return exit_code_for(e);
  } catch (const std::invalid_argument& e) {
    emit_error(err, "ConfigError", e.what());
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    emit_error(err, "ConfigError", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    emit_error(err, "InternalError", e.what());
    return kExitFailure;
  }
}

}  // namespace awrs::cli
