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

#ifndef AWRS_ANALYTICS_HPP
#define AWRS_ANALYTICS_HPP

#include <span>
#include <vector>

/**
 * \file
 * \brief Closed-form expected constraint-call counts.
 */

namespace awrs {

/// Expected calls together with the distractor probabilities of the invalid tokens.
struct RuntimeLaw {
  double expected_calls = 0.0;
  double z = 0.0;
  /// q_x = p(x) / (p(x) + Z) for each invalid x, in token order.
  std::vector<double> distractor;
};

/// (L + 1) / Z.
[[nodiscard]] double wrs_expected_calls(double z, unsigned extra_loops = 1);

/// 1 + L + |X \ C| - sum over invalid x of (1 - q_x)^(L+1).
[[nodiscard]] RuntimeLaw awrs_expected_calls(std::span<const double> prior, const std::vector<bool>& valid,
                                             unsigned extra_loops = 1);

/// Same law for valid mass Z spread over K tokens and 1 - Z spread evenly over the other V - K.
[[nodiscard]] double awrs_expected_calls_grouped(double z, std::size_t valid_tokens, std::size_t vocab,
                                                 unsigned extra_loops = 1);

/// KL(local posterior || prior) = -ln Z.
[[nodiscard]] double kl_cost(double z);

}  // namespace awrs

#endif
