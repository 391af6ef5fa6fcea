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

#ifndef AWRS_RUN_HPP
#define AWRS_RUN_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

/**
 * \file
 * \brief The command-line front end as a library, so it can be tested in-process.
 */

namespace awrs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInference = 3;

/// A `generate` run. Unset optionals keep the library defaults.
struct GenerateConfig {
  std::string model = "example-a1";  ///< builtin name or JSON path
  std::string language;              ///< literal such as "{aa,ba}", or "vacuous"
  std::string trie_path;
  std::string dfa_path;
  std::string method = "smc-awrs";
  std::optional<std::string> sampler;
  std::optional<unsigned> extra_loops;
  std::optional<double> theta0;
  std::optional<double> theta1;
  std::optional<std::uint64_t> budget;
  std::optional<double> top_p;
  std::optional<unsigned> lookahead;
  std::size_t num_particles = 1000;
  std::optional<double> tau;
  std::optional<std::string> resampling;
  std::uint64_t seed = 0;
  std::size_t max_steps = 64;
  unsigned workers = 1;
  std::string out;
};

/// Reads a run descriptor {model, language|trie|pattern, method, sampler, N, tau, L, theta0, theta1, R, top_p, seed, max_steps}.
[[nodiscard]] GenerateConfig parse_run_descriptor(const nlohmann::json& descriptor);

/// Throws ConfigError when a parameter does not apply to the chosen method or sampler.
void validate(const GenerateConfig& config);

/// {method, g_hat, posterior_estimate, ensemble, eval_counts, resample_count, wall_time}.
[[nodiscard]] nlohmann::json run_generate(const GenerateConfig& config);

/// Entry point; `args` excludes the program name. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace awrs::cli

#endif
