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
#include <random>
#include <set>
#include <vector>

#include <awrs/rng.hpp>

namespace {

using awrs::Rng;

TEST(Rng, SameSeedAndStreamRepeat) {
  Rng a{42};
  Rng b{42};
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a(), b());
  }
}

TEST(Rng, StreamsDiffer) {
  Rng a{42, 0};
  Rng b{42, 1};
  Rng c{43, 0};
  int same_ab = 0;
  int same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    same_ab += x == b() ? 1 : 0;
    same_ac += x == c() ? 1 : 0;
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(Rng, SplitIsReproducibleAndDistinct) {
  const Rng parent{7, 3};
  Rng c1 = parent.split(1);
  Rng c1_again = parent.split(1);
  Rng c2 = parent.split(2);
  EXPECT_EQ(c1(), c1_again());
  EXPECT_NE(c1.stream(), c2.stream());
  EXPECT_EQ(c1.seed(), 7U);
}

TEST(Rng, StreamIdIsInjectiveOnSmallGrid) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 30; ++a) {
    for (std::uint64_t b = 0; b < 30; ++b) {
      for (std::uint64_t c = 0; c < 3; ++c) {
        seen.insert(awrs::stream_id(a, b, c));
      }
    }
  }
  EXPECT_EQ(seen.size(), 30U * 30U * 3U);
}

TEST(Rng, UniformRanges) {
  Rng rng{1};
  double sum = 0.0;
  constexpr int kN = 200000;
  for (int i = 0; i < kN; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = rng.uniform_open_zero();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / kN, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / kN));
}

TEST(Rng, ExponentialMean) {
  Rng rng{2};
  double sum = 0.0;
  constexpr int kN = 200000;
  for (int i = 0; i < kN; ++i) {
    const double x = rng.exponential();
    ASSERT_GE(x, 0.0);
    sum += x;
  }
  EXPECT_NEAR(sum / kN, 1.0, 4.0 / std::sqrt(kN));
}

TEST(Rng, GeometricFailures) {
  Rng rng{3};
  EXPECT_EQ(rng.geometric_failures(0.0), 0U);
  EXPECT_EQ(rng.geometric_failures(1.0), std::numeric_limits<std::uint64_t>::max());
  const double q = 0.6;
  double sum = 0.0;
  double zeros = 0.0;
  constexpr int kN = 200000;
  for (int i = 0; i < kN; ++i) {
    const auto g = rng.geometric_failures(q);
    sum += static_cast<double>(g);
    zeros += g == 0 ? 1.0 : 0.0;
  }
  const double mean = q / (1.0 - q);
  const double sd = std::sqrt(q) / (1.0 - q);
  EXPECT_NEAR(sum / kN, mean, 4.0 * sd / std::sqrt(kN));
  EXPECT_NEAR(zeros / kN, 1.0 - q, 4.0 * std::sqrt(q * (1 - q) / kN));
}

TEST(Rng, BernoulliEdges) {
  Rng rng{4};
  for (int i = 0; i < 100; ++i) {
    EXPECT_FALSE(rng.bernoulli(0.0));
    EXPECT_TRUE(rng.bernoulli(1.0));
  }
}

TEST(Rng, WorksWithStandardDistributions) {
  Rng rng{5};
  std::uniform_int_distribution<int> d{0, 9};
  for (int i = 0; i < 100; ++i) {
    const int x = d(rng);
    ASSERT_GE(x, 0);
    ASSERT_LE(x, 9);
  }
}

}  // namespace
