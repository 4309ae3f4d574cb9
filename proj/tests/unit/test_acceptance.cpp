// Copyright 2026 The gpsabc Authors
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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "gpsabc/acceptance.hpp"
#include "gpsabc/rng.hpp"

namespace gpsabc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using testing::random_alphas;

TEST(AlphaFromParts, Examples) {
  EXPECT_EQ(alpha_from_parts({}), 1.0);
  EXPECT_NEAR(alpha_from_parts({0.0, 0.0, std::log(0.25), 0.0}), 0.25, 1e-15);
  EXPECT_EQ(alpha_from_parts({50.0, 0.0, 0.0, 0.0}), 1.0);
  EXPECT_EQ(alpha_from_parts({0.0, 0.0, -kInf, 3.0}), 0.0);
  EXPECT_EQ(alpha_from_parts({-kInf, 0.0, 1.0, 3.0}), 0.0);
  EXPECT_EQ(alpha_from_parts({0.0, 0.0, 1.0, -kInf}), 1.0);
  EXPECT_THROW(alpha_from_parts({std::nan(""), 0.0, 0.0, 0.0}), InvalidArgument);
  EXPECT_THROW(alpha_from_parts({0.0, 0.0, kInf, kInf}), InvalidArgument);
}

TEST(AlphaFromParts, AlwaysInUnitInterval) {
  RngStream rng(50, 0);
  for (int i = 0; i < 10000; ++i) {
    const AcceptanceRatioParts p{normal_draw(rng, 0, 300), normal_draw(rng, 0, 3), normal_draw(rng, 0, 800),
                                 normal_draw(rng, 0, 800)};
    const double a = alpha_from_parts(p);
    ASSERT_GE(a, 0.0);
    ASSERT_LE(a, 1.0);
  }
}

TEST(LowerMedian, OddAndEven) {
  EXPECT_EQ(lower_median(std::vector<double>{0.3}), 0.3);
  EXPECT_EQ(lower_median(std::vector<double>{0.9, 0.1, 0.5}), 0.5);
  EXPECT_EQ(lower_median(std::vector<double>{0.8, 0.2}), 0.2);
  EXPECT_EQ(lower_median(std::vector<double>{0.4, 0.1, 0.9, 0.7}), 0.4);
  EXPECT_THROW(lower_median(std::vector<double>{}), InvalidArgument);
}

TEST(ConditionalError, Examples) {
  const std::vector<double> a{0.2, 0.8};
  EXPECT_EQ(conditional_error(a, 0.3, 0.5), 0.5);
  EXPECT_EQ(conditional_error(a, 0.9, 0.5), 0.0);
  EXPECT_EQ(conditional_error(a, 0.8, 0.5), 0.5);  // alpha >= u counts
  const std::vector<double> point(7, 0.4);
  EXPECT_EQ(conditional_error(point, 0.4, 0.4), 0.0);
}

TEST(UnconditionalError, Examples) {
  // Exact value 0.5 * (0.5 - 0.2) + 0.5 * (0.8 - 0.5); the midpoint grid is within one cell.
  EXPECT_NEAR(unconditional_error(std::vector<double>{0.2, 0.8}, 0.5), 0.3, 1.0 / 201.0);
  EXPECT_NEAR(unconditional_error(std::vector<double>{0.2, 0.8}, 0.5, 100001), 0.3, 1.0 / 100001.0);
  EXPECT_EQ(unconditional_error(std::vector<double>(9, 0.37), 0.37), 0.0);
  EXPECT_THROW(unconditional_error(std::vector<double>{0.5}, 0.5, 1), InvalidArgument);
}

TEST(UnconditionalError, MatchesMadOracle) {
  RngStream rng(51, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_alphas(rng);
    for (int grid : {201, 1001}) {
      const auto ens = make_ensemble(a, grid);
      ASSERT_NEAR(ens.error, testing::mad_error(a, ens.tau), 2.0 / grid) << "trial " << trial;
    }
  }
}

TEST(UnconditionalError, BoundsHold) {
  RngStream rng(52, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_alphas(rng);
    const auto ens = make_ensemble(a);
    ASSERT_GE(ens.error, 0.0);
    ASSERT_LE(ens.error, 0.5);
    // Shift bound with one grid cell of slack for the midpoint rule.
    ASSERT_LE(ens.error, ens.width() / 2.0 + 1.0 / 201.0);
  }
}

TEST(UnconditionalError, MedianMinimizesOverThresholds) {
  RngStream rng(53, 0);
  const int grid = 201;
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_alphas(rng);
    const double tau = lower_median(a);
    const double at_median = unconditional_error(a, tau, grid);
    double best = at_median;
    double best_t = tau;
    for (int k = 0; k <= grid; ++k) {
      const double t = static_cast<double>(k) / grid;
      const double e = unconditional_error(a, t, grid);
      if (e < best) {
        best = e;
        best_t = t;
      }
    }
    // Any improvement is grid round-off on a flat stretch of the MAD.
    ASSERT_LE(at_median - best, 2.0 / grid) << "trial " << trial << " best t " << best_t;
    ASSERT_LE(testing::mad_error(a, tau), testing::mad_error(a, best_t) + 1e-15);
  }
}

TEST(UnconditionalError, MonteCarloOverUConverges) {
  RngStream rng(54, 0);
  const auto a = random_alphas(rng);
  const double tau = lower_median(a);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = conditional_error(a, rng.uniform(), tau);
    s += e;
    s2 += e * e;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, testing::mad_error(a, tau), 3.0 * se + 1e-12);
  EXPECT_NEAR(unconditional_error(a, tau, 100001), testing::mad_error(a, tau), 2e-5);
}

TEST(MhDecide, BoundaryConvention) {
  AcceptanceEnsemble e;
  e.tau = 1.0;
  EXPECT_EQ(mh_decide(e, 0.999999), Decision::kAccept);
  e.tau = 0.0;
  EXPECT_EQ(mh_decide(e, 0.0), Decision::kAccept);
  EXPECT_EQ(mh_decide(e, 0.001), Decision::kReject);
  e.tau = 0.5;
  EXPECT_EQ(mh_decide(e, 0.5), Decision::kAccept);
  EXPECT_EQ(mh_decide(e, std::nextafter(0.5, 1.0)), Decision::kReject);
}

}  // namespace
}  // namespace gpsabc
