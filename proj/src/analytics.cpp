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

#include <awrs/analytics.hpp>

#include <cmath>
#include <stdexcept>

#include <awrs/numeric.hpp>

namespace awrs {

namespace {

void check_z(double z) {
  if (!(z > 0.0 && z <= 1.0 + 1e-12)) {
    throw std::invalid_argument("Z must lie in (0, 1]");
  }
}

// 1 - (1 - q)^(L+1), accurate for tiny q.
double hit_probability(double q, unsigned extra_loops) {
  return -std::expm1(static_cast<double>(extra_loops + 1U) * std::log1p(-q));
}

}  // namespace

double wrs_expected_calls(double z, unsigned extra_loops) {
  check_z(z);
  if (extra_loops < 1) {
    throw std::invalid_argument("L must be at least 1");
  }
  return static_cast<double>(extra_loops + 1U) / z;
}

RuntimeLaw awrs_expected_calls(std::span<const double> prior, const std::vector<bool>& valid, unsigned extra_loops) {
  if (prior.size() != valid.size()) {
    throw std::invalid_argument("prior and valid set differ in size");
  }
  if (extra_loops < 1) {
    throw std::invalid_argument("L must be at least 1");
  }
  RuntimeLaw law;
  CompensatedSum z;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (valid[i]) {
      z += prior[i];
    }
  }
  law.z = z.value();
  check_z(law.z);
  CompensatedSum calls;
  calls += 1.0 + static_cast<double>(extra_loops);
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (!valid[i]) {
      const double q = prior[i] / (prior[i] + law.z);
      law.distractor.push_back(q);
      calls += hit_probability(q, extra_loops);
    }
  }
  law.expected_calls = calls.value();
  return law;
}

double awrs_expected_calls_grouped(double z, std::size_t valid_tokens, std::size_t vocab, unsigned extra_loops) {
  check_z(z);
  if (valid_tokens < 1 || valid_tokens > vocab) {
    throw std::invalid_argument("need 1 <= K <= V");
  }
  const std::size_t invalid = vocab - valid_tokens;
  double extra = 0.0;
  if (invalid > 0) {
    const double p = (1.0 - z) / static_cast<double>(invalid);
    extra = static_cast<double>(invalid) * hit_probability(p / (p + z), extra_loops);
  }
  return 1.0 + static_cast<double>(extra_loops) + extra;
}

double kl_cost(double z) {
  check_z(z);
  return -std::log(z);
}

}  // namespace awrs
