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

#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "gpsabc/priors.hpp"
#include "gpsabc/rng.hpp"

namespace gpsabc {
namespace {

using Block = std::array<std::uint64_t, 4>;

// Known answers cross-checked against an independent Philox4x64-10 implementation.
TEST(Philox, KnownAnswerVectors) {
  EXPECT_EQ(philox4x64({0, 0, 0, 0}, {0, 0}),
            (Block{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL}));
  constexpr auto kOnes = ~std::uint64_t{0};
  EXPECT_EQ(philox4x64({kOnes, kOnes, kOnes, kOnes}, {kOnes, kOnes}),
            (Block{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL, 0x9cc7d7c69cd777b6ULL, 0xa09caebf594f0ba0ULL}));
  EXPECT_EQ(philox4x64({1, 0, 7, 0}, {12345, 0}),
            (Block{0xcb6d5c4d739f2faaULL, 0xabbc4e4ea36aad91ULL, 0x5c67c9af31692920ULL, 0x58219f8316a64d13ULL}));
  EXPECT_EQ(philox4x64({5, 0, 3, 0}, {0xdeadbeefcafebabeULL, 0}),
            (Block{0xad551e05558c1399ULL, 0x5abf3554b1017649ULL, 0xbc7723583d9c264cULL, 0xd09d7247a5ff763cULL}));
}

TEST(RngStream, WalksCounterBlocksInOrder) {
  RngStream rng(12345, 7);
  for (int i = 0; i < 4; ++i) rng();
  const Block second = philox4x64({1, 0, 7, 0}, {12345, 0});
  for (int i = 0; i < 4; ++i) EXPECT_EQ(rng(), second[static_cast<std::size_t>(i)]);
}

TEST(RngStream, SameSeedAndStreamReproduce) {
  RngStream a(99, 3);
  RngStream b(99, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(RngStream, DistinctStreamsDoNotCollide) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t id = 0; id < 8; ++id) {
    RngStream rng(5, id);
    for (int i = 0; i < 512; ++i) seen.insert(rng());
  }
  EXPECT_EQ(seen.size(), 8u * 512u);
}

TEST(RngStream, SubstreamMatchesDirectConstruction) {
  RngStream parent(11, 0);
  RngStream child = parent.substream(4);
  RngStream direct(11, 4);
  for (int i = 0; i < 16; ++i) EXPECT_EQ(child(), direct());
}

TEST(StreamFactory, IssuesConsecutiveIds) {
  StreamFactory f(3, 1);
  EXPECT_EQ(f.next().stream_id(), 1u);
  EXPECT_EQ(f.next().stream_id(), 2u);
  EXPECT_EQ(f.issued_up_to(), 3u);
}

TEST(RngStream, UniformsStayInRange) {
  RngStream rng(1, 1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    const double v = rng.uniform_open();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <typename F>
Moments moments_of(int n, F&& draw) {
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw();
    s += x;
    s2 += x * x;
  }
  const double m = s / n;
  return {m, s2 / n - m * m};
}

TEST(Distributions, StandardNormalMoments) {
  RngStream rng(2, 0);
  const auto m = moments_of(200000, [&] { return rng.standard_normal(); });
  EXPECT_NEAR(m.mean, 0.0, 4.0 / std::sqrt(200000.0));
  EXPECT_NEAR(m.var, 1.0, 0.015);
}

TEST(Distributions, NormalDrawWithZeroStdIsExact) {
  RngStream rng(2, 0);
  EXPECT_EQ(normal_draw(rng, 3.25, 0.0), 3.25);
  EXPECT_THROW(normal_draw(rng, 0.0, -1.0), InvalidArgument);
}

TEST(Distributions, ExponentialMean) {
  RngStream rng(3, 0);
  const auto m = moments_of(200000, [&] { return exponential_draw(rng, 0.5); });
  EXPECT_NEAR(m.mean, 2.0, 4.0 * 2.0 / std::sqrt(200000.0));
  EXPECT_NEAR(m.var, 4.0, 0.1);
}

class GammaMoments : public ::testing::TestWithParam<std::pair<double, double>> {};

TEST_P(GammaMoments, MatchShapeOverRate) {
  const auto [shape, rate] = GetParam();
  RngStream rng(4, 0);
  const int n = 200000;
  const auto m = moments_of(n, [&] { return gamma_draw(rng, shape, rate); });
  const double mean = shape / rate;
  const double var = shape / (rate * rate);
  EXPECT_NEAR(m.mean, mean, 5.0 * std::sqrt(var / n));
  EXPECT_NEAR(m.var / var, 1.0, shape < 1.0 ? 0.12 : 0.03);
}

INSTANTIATE_TEST_SUITE_P(Shapes, GammaMoments,
                         ::testing::Values(std::pair{0.5, 1.0}, std::pair{1.0, 2.0}, std::pair{2.5, 0.5},
                                           std::pair{30.0, 3.0}));

// For tiny shapes the variate itself underflows, but its log has mean
// digamma(a) - log(rate) and variance trigamma(a).
TEST(Distributions, LogGammaTinyShapeMoments) {
  RngStream rng(6, 0);
  const double shape = 0.1;
  const int n = 200000;
  const auto m = moments_of(n, [&] { return log_gamma_draw(rng, shape, 0.1); });
  const double digamma_01 = -10.423754940411076;  // psi(0.1)
  EXPECT_NEAR(m.mean, digamma_01 - std::log(0.1), 5.0 * std::sqrt(trigamma(shape) / n));
  EXPECT_NEAR(m.var / trigamma(shape), 1.0, 0.03);
}

TEST(Distributions, RejectsInvalidParameters) {
  RngStream rng(1, 0);
  EXPECT_THROW(gamma_draw(rng, 0.0, 1.0), InvalidArgument);
  EXPECT_THROW(gamma_draw(rng, 1.0, -1.0), InvalidArgument);
  EXPECT_THROW(exponential_draw(rng, 0.0), InvalidArgument);
}

TEST(Trigamma, KnownValues) {
  EXPECT_NEAR(trigamma(1.0), M_PI * M_PI / 6.0, 1e-12);
  EXPECT_NEAR(trigamma(0.5), M_PI * M_PI / 2.0, 1e-12);
  EXPECT_NEAR(trigamma(0.1), 101.43329915079276, 1e-9);
}

}  // namespace
}  // namespace gpsabc
