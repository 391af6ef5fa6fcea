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
#include <limits>
#include <vector>

#include <awrs/categorical.hpp>
#include <awrs/errors.hpp>
#include <awrs/numeric.hpp>

namespace {

using awrs::Categorical;
using awrs::normalize;
using awrs::Rng;
using awrs::Token;

// Wilson-Hilferty approximation of the chi-square upper quantile at p = 1e-6.
double chi_square_critical(std::size_t df) {
  constexpr double kZ = 4.753424;
  const double k = static_cast<double>(df);
  const double a = 2.0 / (9.0 * k);
  return k * std::pow(1.0 - a + kZ * std::sqrt(a), 3.0);
}

TEST(Normalize, ProportionalExamples) {
  const std::vector<double> w1{2, 2};
  const auto a = normalize(w1);
  EXPECT_DOUBLE_EQ(a[0], 0.5);
  EXPECT_DOUBLE_EQ(a[1], 0.5);

  const std::vector<double> w2{1, 0, 3};
  const auto b = normalize(w2);
  EXPECT_DOUBLE_EQ(b[0], 0.25);
  EXPECT_DOUBLE_EQ(b[1], 0.0);
  EXPECT_DOUBLE_EQ(b[2], 0.75);
  EXPECT_EQ(b.support_size(), 2U);
  EXPECT_EQ(b.vocab_size(), 3U);
}

TEST(Normalize, Errors) {
  const std::vector<double> zeros{0, 0};
  EXPECT_THROW((void)normalize(zeros), awrs::AllZeroMass);
  const std::vector<double> negative{1, -1};
  EXPECT_THROW((void)normalize(negative), std::invalid_argument);
  const std::vector<double> nan{1, std::numeric_limits<double>::quiet_NaN()};
  EXPECT_THROW((void)normalize(nan), std::invalid_argument);
}

TEST(Normalize, SumsToOneOnAwkwardWeights) {
  std::vector<double> w;
  for (int i = 1; i <= 997; ++i) {
    w.push_back(1.0 / i);
  }
  const auto d = normalize(w);
  EXPECT_NEAR(awrs::compensated_sum(d.probs()), 1.0, 1e-12);
  EXPECT_NEAR(d.cdf().back(), 1.0, 1e-12);
}

TEST(Sample, PointMass) {
  const auto d = Categorical::point_mass(3, 0);
  Rng rng{1};
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(d.sample(rng), 0U);
  }
}

TEST(Sample, FairCoinFrequency) {
  const std::vector<double> w{0.5, 0.5};
  const auto d = normalize(w);
  Rng rng{2};
  constexpr int kN = 1000000;
  int zeros = 0;
  for (int i = 0; i < kN; ++i) {
    zeros += d.sample(rng) == 0 ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(zeros) / kN, 0.5, 0.002);
}

TEST(Sample, SeededSequenceRepeats) {
  const std::vector<double> w{0.2, 0.3, 0.5};
  const auto d = normalize(w);
  Rng a{42};
  Rng b{42};
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(d.sample(a), d.sample(b));
  }
}

TEST(Sample, ZeroMassNeverDrawn) {
  const std::vector<double> w{0, 0.3, 0, 0.7, 0};
  const auto d = normalize(w);
  Rng rng{3};
  for (int i = 0; i < 100000; ++i) {
    const Token t = d.sample(rng);
    ASSERT_TRUE(t == 1 || t == 3);
  }
}

TEST(Sample, ChiSquareGoodnessOfFit) {
  Rng gen{4};
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> w(30);
    for (auto& x : w) {
      x = gen.exponential();
    }
    const auto d = normalize(w);
    std::vector<double> counts(w.size(), 0.0);
    constexpr int kN = 100000;
    Rng rng{5, static_cast<std::uint64_t>(trial)};
    for (int i = 0; i < kN; ++i) {
      counts[d.sample(rng)] += 1.0;
    }
    double stat = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double e = kN * d[static_cast<Token>(i)];
      stat += (counts[i] - e) * (counts[i] - e) / e;
    }
    EXPECT_LT(stat, chi_square_critical(w.size() - 1));
  }
}

TEST(SworKeys, Singleton) {
  const auto d = Categorical::point_mass(1, 0);
  Rng rng{1};
  const auto k = awrs::swor_keys(d, rng);
  ASSERT_EQ(k.order.size(), 1U);
  EXPECT_EQ(k.order[0], 0U);
}

TEST(SworKeys, FirstElementFollowsMass) {
  const std::vector<double> w{0.9, 0.1};
  const auto d = normalize(w);
  Rng rng{2};
  constexpr int kN = 100000;
  int first_zero = 0;
  for (int i = 0; i < kN; ++i) {
    first_zero += awrs::swor_keys(d, rng).order[0] == 0 ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(first_zero) / kN, 0.9, 0.004);
}

TEST(SworKeys, ZeroMassLastWithInfiniteKey) {
  const std::vector<double> w{0.5, 0.5, 0};
  const auto d = normalize(w);
  Rng rng{3};
  for (int i = 0; i < 1000; ++i) {
    const auto k = awrs::swor_keys(d, rng);
    ASSERT_EQ(k.order.back(), 2U);
    ASSERT_TRUE(std::isinf(k.keys[2]));
  }
}

TEST(SworKeys, PermutationWithSortedKeys) {
  Rng gen{4};
  std::vector<double> w(20);
  for (auto& x : w) {
    x = gen.exponential();
  }
  w[7] = 0.0;
  const auto d = normalize(w);
  const auto k = awrs::swor_keys(d, gen);
  std::vector<int> seen(w.size(), 0);
  for (std::size_t i = 0; i < k.order.size(); ++i) {
    ++seen[k.order[i]];
    if (i > 0) {
      EXPECT_LE(k.keys[k.order[i - 1]], k.keys[k.order[i]]);
    }
  }
  for (const int s : seen) {
    EXPECT_EQ(s, 1);
  }
}

TEST(SworKeys, FirstMarginalsWithinFourSigma) {
  const std::vector<double> w{0.4, 0.25, 0.2, 0.1, 0.05};
  const auto d = normalize(w);
  Rng rng{5};
  constexpr int kN = 100000;
  std::vector<double> first(w.size(), 0.0);
  std::vector<double> second(w.size(), 0.0);
  for (int i = 0; i < kN; ++i) {
    const auto k = awrs::swor_keys(d, rng);
    first[k.order[0]] += 1.0;
    second[k.order[1]] += 1.0;
  }
  for (std::size_t t = 0; t < w.size(); ++t) {
    const double p = w[t];
    EXPECT_NEAR(first[t] / kN, p, 4.0 * std::sqrt(p * (1 - p) / kN)) << t;
    // P(t second) = sum_{s != t} p_s p_t / (1 - p_s)
    double p2 = 0.0;
    for (std::size_t s = 0; s < w.size(); ++s) {
      if (s != t) {
        p2 += w[s] * w[t] / (1.0 - w[s]);
      }
    }
    EXPECT_NEAR(second[t] / kN, p2, 4.0 * std::sqrt(p2 * (1 - p2) / kN)) << t;
  }
}

TEST(RemoveRenormalize, Examples) {
  const std::vector<double> w{0.5, 0.3, 0.2};
  const auto d = normalize(w);
  const std::vector<Token> r0{0};
  const auto a = awrs::remove_renormalize(d, r0);
  EXPECT_DOUBLE_EQ(a[0], 0.0);
  EXPECT_NEAR(a[1], 0.6, 1e-15);
  EXPECT_NEAR(a[2], 0.4, 1e-15);
  EXPECT_EQ(awrs::remove_renormalize(d, {}), d);

  const std::vector<double> half{0.5, 0.5};
  const std::vector<Token> both{0, 1};
  EXPECT_THROW((void)awrs::remove_renormalize(normalize(half), both), awrs::AllZeroMass);
}

TEST(RemoveRenormalize, CommutesWithUnion) {
  Rng gen{6};
  std::vector<double> w(12);
  for (auto& x : w) {
    x = gen.exponential();
  }
  const auto d = normalize(w);
  const std::vector<Token> first{1, 4};
  const std::vector<Token> second{7, 0};
  const std::vector<Token> both{1, 4, 7, 0};
  const auto stepwise = awrs::remove_renormalize(awrs::remove_renormalize(d, first), second);
  const auto once = awrs::remove_renormalize(d, both);
  for (Token t = 0; t < w.size(); ++t) {
    EXPECT_NEAR(stepwise[t], once[t], 1e-12);
  }
}

TEST(CompensatedSum, RecoversLostLowBits) {
  awrs::CompensatedSum s;
  s += 1.0;
  for (int i = 0; i < 1000000; ++i) {
    s += 1e-16;
  }
  EXPECT_NEAR(s.value(), 1.0 + 1e-10, 1e-15);
}

}  // namespace
