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
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <awrs/analytics.hpp>
#include <awrs/oracle.hpp>
#include <awrs/samplers.hpp>

namespace {

// Expected AWRS constraint calls by exhaustive enumeration of rejection orders.
double enumerated_awrs_calls(const std::vector<double>& p, const std::vector<bool>& valid) {
  std::vector<bool> removed(p.size(), false);
  const auto rest = [&] {
    double m = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m += removed[i] ? 0.0 : p[i];
    }
    return m;
  };
  std::function<double(int, double)> loop = [&](int loops_left, double prob) {
    const double r = rest();
    double e = 0.0;
    for (std::size_t t = 0; t < p.size(); ++t) {
      if (removed[t] || p[t] == 0.0) {
        continue;
      }
      const double q = prob * p[t] / r;
      e += q;
      if (valid[t]) {
        if (loops_left > 0) {
          e += loop(loops_left - 1, q);
        }
      } else {
        removed[t] = true;
        e += loop(loops_left, q);
        removed[t] = false;
      }
    }
    return e;
  };
  return loop(1, 1.0);
}

TEST(WrsLaw, Examples) {
  EXPECT_DOUBLE_EQ(awrs::wrs_expected_calls(0.5, 1), 4.0);
  for (unsigned l = 1; l <= 8; ++l) {
    EXPECT_DOUBLE_EQ(awrs::wrs_expected_calls(1.0, l), l + 1.0);
  }
  EXPECT_THROW((void)awrs::wrs_expected_calls(0.0, 1), std::invalid_argument);
  EXPECT_THROW((void)awrs::wrs_expected_calls(1.5, 1), std::invalid_argument);
}

TEST(WrsLaw, MonteCarlo) {
  const auto prior = awrs::normalize(std::vector<double>{0.5, 0.3, 0.2});
  const auto c = awrs::mask_constraint({false, false, true});
  awrs::Rng rng{1};
  constexpr int kN = 1000000;
  double calls = 0.0;
  for (int i = 0; i < kN; ++i) {
    calls += static_cast<double>(awrs::wrs(prior, c, 1, rng).trials);
  }
  EXPECT_NEAR(calls / kN, 10.0, 0.05);
}

TEST(AwrsLaw, OneDistractor) {
  const std::vector<double> p{0.5, 0.5};
  const auto law = awrs::awrs_expected_calls(p, {false, true}, 1);
  EXPECT_DOUBLE_EQ(law.expected_calls, 2.75);
  EXPECT_DOUBLE_EQ(law.z, 0.5);
  ASSERT_EQ(law.distractor.size(), 1U);
  EXPECT_DOUBLE_EQ(law.distractor[0], 0.5);

  const auto prior = awrs::normalize(p);
  const auto c = awrs::mask_constraint({false, true});
  awrs::Rng rng{2};
  constexpr int kN = 1000000;
  double calls = 0.0;
  for (int i = 0; i < kN; ++i) {
    calls += static_cast<double>(awrs::awrs(prior, c, rng).trials);
  }
  EXPECT_NEAR(calls / kN, 2.75, 0.01);
}

TEST(AwrsLaw, NoInvalidTokensAndSaturation) {
  const std::vector<double> p{0.2, 0.3, 0.5};
  for (unsigned l = 1; l <= 4; ++l) {
    EXPECT_DOUBLE_EQ(awrs::awrs_expected_calls(p, {true, true, true}, l).expected_calls, 1.0 + l);
  }
  // Tiny Z pushes every q_x towards 1.
  std::vector<double> w(10, 1.0);
  w[0] = 1e-12;
  std::vector<bool> valid(10, false);
  valid[0] = true;
  EXPECT_NEAR(awrs::awrs_expected_calls(w, valid, 1).expected_calls, 1.0 + 1.0 + 9.0, 1e-9);
}

TEST(AwrsLaw, MatchesEnumeration) {
  awrs::Rng rng{3};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> p(6);
    std::vector<bool> valid(6);
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = rng.exponential();
      total += p[i];
      valid[i] = rng.bernoulli(0.4) || i == 5;
    }
    for (auto& x : p) {
      x /= total;
    }
    EXPECT_NEAR(awrs::awrs_expected_calls(p, valid, 1).expected_calls, enumerated_awrs_calls(p, valid), 1e-12);
  }
}

TEST(AwrsLaw, GroupedAgreesWithExplicitPrior) {
  for (const double z : {0.05, 0.5, 0.9}) {
    for (std::size_t k = 1; k < 10; k += 3) {
      std::vector<double> p(10);
      std::vector<bool> valid(10);
      for (std::size_t i = 0; i < 10; ++i) {
        valid[i] = i < k;
        p[i] = valid[i] ? z / k : (1.0 - z) / (10 - k);
      }
      for (unsigned l = 1; l <= 3; ++l) {
        EXPECT_NEAR(awrs::awrs_expected_calls_grouped(z, k, 10, l),
                    awrs::awrs_expected_calls(p, valid, l).expected_calls, 1e-12);
      }
    }
  }
  EXPECT_THROW((void)awrs::awrs_expected_calls_grouped(0.5, 0, 10), std::invalid_argument);
}

TEST(AwrsLaw, RejectsEmptyValidSet) {
  const std::vector<double> p{0.5, 0.5};
  EXPECT_THROW((void)awrs::awrs_expected_calls(p, {false, false}), std::invalid_argument);
}

TEST(KlCost, Examples) {
  EXPECT_DOUBLE_EQ(awrs::kl_cost(1.0), 0.0);
  EXPECT_NEAR(awrs::kl_cost(std::exp(-1.0)), 1.0, 1e-15);
  EXPECT_THROW((void)awrs::kl_cost(0.0), std::invalid_argument);

  awrs::Rng rng{4};
  std::vector<double> w(20);
  std::vector<bool> valid(20);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = rng.exponential();
    valid[i] = rng.bernoulli(0.5) || i == 0;
  }
  const auto prior = awrs::normalize(w);
  const auto local = awrs::token_mask(prior, awrs::mask_constraint(valid));
  double kl = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (local.post[i] > 0.0) {
      kl += local.post[i] * std::log(local.post[i] / prior[i]);
    }
  }
  EXPECT_NEAR(awrs::kl_cost(local.z), kl, 1e-9);
}

}  // namespace
