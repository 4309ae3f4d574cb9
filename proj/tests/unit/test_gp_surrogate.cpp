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
#include <sstream>

#include <gtest/gtest.h>

#include "../support/gp_checks.hpp"
#include "gpsabc/gp_surrogate.hpp"

namespace gpsabc {
namespace {

using testing::random_point;
using testing::random_surrogate;

Vector scalar(double v) { return Vector::Constant(1, v); }

TEST(GpPredict, EmptyStateIsThePrior) { EXPECT_EQ(testing::prior_reduction_error(30, 60), 0.0); }

TEST(GpPredict, DuplicatedQueryIsRankOne) {
  RngStream rng(61, 0);
  const auto s = random_surrogate(2, 2, 25, rng);
  const Vector a = random_point(2, rng);
  for (std::size_t j = 0; j < 2; ++j) {
    const auto p = s.predict(j, a, a);
    const double sv = s.hyperparams(j).signal_variance;
    EXPECT_EQ(p.mean[0], p.mean[1]);
    EXPECT_LE(std::abs(p.covariance(0, 0) - p.covariance(0, 1)), 1e-8 * sv);
    EXPECT_LE(std::abs(p.covariance(1, 1) - p.covariance(0, 1)), 1e-8 * sv);
  }
}

TEST(GpPredict, InterpolatesWithVanishingNoise) {
  const auto e = testing::interpolation_max_error(30, 62);
  EXPECT_LE(e.mean, 1e-6);
  EXPECT_LE(e.variance, 1e-8);
}

TEST(GpPredict, CachedMatchesDenseSolve) { EXPECT_LE(testing::dense_solve_max_diff(3, 63), 1e-8); }

TEST(GpPredict, IndexOutOfRange) {
  const SurrogateState s(1, 2);
  EXPECT_THROW(s.predict(2, scalar(0), scalar(1)), InvalidArgument);
}

TEST(GpPredict, TranslationInvariantCovariance) {
  RngStream rng(64, 0);
  const auto s = random_surrogate(3, 1, 30, rng);
  const Vector shift = random_point(3, rng, 10.0);
  SurrogateState t(3, 1);
  t.set_hyperparams(0, s.hyperparams(0));
  for (std::size_t i = 0; i < s.size(); ++i) {
    t.insert(s.inputs().row(static_cast<Eigen::Index>(i)).transpose() + shift, s.raw_outputs().row(static_cast<Eigen::Index>(i)).transpose());
  }
  for (int q = 0; q < 10; ++q) {
    const Vector a = random_point(3, rng);
    const Vector b = random_point(3, rng);
    const auto p = s.predict(0, a, b);
    const auto r = t.predict(0, a + shift, b + shift);
    EXPECT_LE((p.covariance - r.covariance).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((p.mean - r.mean).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(GpPredict, StatisticsAreIndependent) {
  RngStream rng(65, 0);
  const auto s = random_surrogate(2, 2, 20, rng);
  SurrogateState t(2, 2);
  for (std::size_t j = 0; j < 2; ++j) t.set_hyperparams(j, s.hyperparams(j));
  for (std::size_t i = 0; i < s.size(); ++i) {
    Vector x = s.raw_outputs().row(static_cast<Eigen::Index>(i)).transpose();
    x[1] = 100.0 * rng.standard_normal();
    t.insert(s.inputs().row(static_cast<Eigen::Index>(i)).transpose(), x);
  }
  const Vector a = random_point(2, rng);
  const Vector b = random_point(2, rng);
  const auto p = s.predict(0, a, b);
  const auto r = t.predict(0, a, b);
  EXPECT_EQ(p.mean, r.mean);
  EXPECT_EQ(p.covariance, r.covariance);
  EXPECT_NE(s.predict(1, a, b).mean, t.predict(1, a, b).mean);
}

TEST(GpInsert, IncrementalMatchesColdRebuild) { EXPECT_LE(testing::rebuild_max_diff(6, 66), 1e-8); }

TEST(GpInsert, VarianceContracts) { EXPECT_LE(testing::contraction_max_increase(10, 67), 1e-12); }

TEST(GpInsert, DuplicatePointLeavesMeanUnchanged) {
  SurrogateState s(1, 1);
  GpHyperparams h;
  h.signal_variance = 1.0;
  h.length_scales = scalar(0.5);
  h.noise_variance = 1e-10;
  s.set_hyperparams(0, h);
  for (int i = 0; i < 6; ++i) s.insert(scalar(0.4 * i), scalar(std::sin(0.4 * i) + 3.0));
  const double before = s.marginal_mean(0, scalar(0.8));
  const double var_before = s.marginal_variance(0, scalar(0.8));
  s.insert(scalar(0.8), scalar(std::sin(0.8) + 3.0));
  EXPECT_EQ(s.size(), 7u);
  EXPECT_NEAR(s.marginal_mean(0, scalar(0.8)), before, 1e-6);
  EXPECT_LE(s.marginal_variance(0, scalar(0.8)), var_before + 1e-15);
}

TEST(GpInsert, RejectsBadInput) {
  SurrogateOptions opts;
  opts.transforms = {OutputTransform::kLog};
  SurrogateState s(2, 1, opts);
  EXPECT_THROW(s.insert(Vector::Zero(3), scalar(1)), InvalidArgument);
  EXPECT_THROW(s.insert(Vector::Zero(2), scalar(std::nan(""))), InvalidArgument);
  EXPECT_THROW(s.insert(Vector::Zero(2), scalar(-1.0)), InvalidArgument);
  EXPECT_FALSE(s.accepts(scalar(0.0)));
  EXPECT_TRUE(s.accepts(scalar(2.0)));
  EXPECT_EQ(s.size(), 0u);
}

TEST(GpInsert, OutputTransformWarpsModelledValues) {
  SurrogateOptions opts;
  opts.transforms = {OutputTransform::kLog, OutputTransform::kLog1p};
  SurrogateState s(1, 2, opts);
  Vector x(2);
  x << 5.0, 0.5;
  s.insert(scalar(0.0), x);
  EXPECT_EQ(s.outputs()(0, 0), std::log(5.0));
  EXPECT_EQ(s.outputs()(0, 1), std::log1p(0.5));
  EXPECT_EQ(s.raw_outputs()(0, 0), 5.0);
  EXPECT_EQ(s.model_observation(0, 5.0), std::log(5.0));
  for (auto t : {OutputTransform::kIdentity, OutputTransform::kLog, OutputTransform::kLog1p}) {
    EXPECT_NEAR(unwarp(t, warp(t, 2.5)), 2.5, 1e-15);
  }
  EXPECT_EQ(parse_transform(transform_name(OutputTransform::kLog1p)), OutputTransform::kLog1p);
  EXPECT_THROW(parse_transform("sqrt"), InvalidArgument);
}

TEST(SampleBivariate, ZeroCovarianceReturnsMeans) {
  BivariatePredictive b;
  b.mean << 1.5, -0.5;
  RngStream rng(68, 0);
  const auto [p, c] = sample_bivariate(b, rng);
  EXPECT_EQ(p, 1.5);
  EXPECT_EQ(c, -0.5);
}

TEST(SampleBivariate, EmpiricalCovariance) {
  BivariatePredictive b;
  b.covariance << 2.0, 0.9, 0.9, 1.0;
  RngStream rng(69, 0);
  const int n = 100000;
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i) {
    const auto [p, c] = sample_bivariate(b, rng);
    const Eigen::Vector2d v(p, c);
    acc += v * v.transpose();
  }
  acc /= n;
  EXPECT_LE((acc - b.covariance).norm(), 0.03 * b.covariance.norm());
}

TEST(SampleBivariate, RankOneDrawsAreLinear) {
  BivariatePredictive b;
  b.mean << 1.0, 2.0;
  b.covariance << 4.0, 2.0, 2.0, 1.0;  // theta' component = 2 * theta component
  RngStream rng(70, 0);
  for (int i = 0; i < 1000; ++i) {
    const auto [p, c] = sample_bivariate(b, rng);
    EXPECT_NEAR(p - 1.0, 2.0 * (c - 2.0), 1e-8);
  }
}

TEST(AcquireLocation, PrefersTheUncertainSide) {
  SurrogateState s(1, 2);
  for (int i = 0; i < 10; ++i) {
    Vector x(2);
    x << i, -i;
    s.insert(scalar(0.01 * i), x);
  }
  EXPECT_EQ(acquire_location(s, scalar(0.05), scalar(5.0))[0], 5.0);
  EXPECT_EQ(acquire_location(s, scalar(5.0), scalar(0.05))[0], 5.0);
}

TEST(AcquireLocation, TiesGoToProposal) {
  const SurrogateState empty(1, 1);
  EXPECT_EQ(acquire_location(empty, scalar(0.0), scalar(3.0))[0], 3.0);
  SurrogateState sym(1, 1);
  sym.insert(scalar(-1.0), scalar(0.0));
  sym.insert(scalar(1.0), scalar(0.0));
  EXPECT_EQ(acquire_location(sym, scalar(-0.5), scalar(0.5))[0], 0.5);
}

TEST(FitHyperparams, ZeroStepsIsIdentity) {
  RngStream rng(71, 0);
  auto s = random_surrogate(2, 2, 15, rng);
  const auto before = s.packed_log_hyperparams(1);
  EXPECT_TRUE(fit_hyperparams(s, 0).empty());
  EXPECT_EQ(s.packed_log_hyperparams(1), before);
}

TEST(FitHyperparams, GradientMatchesFiniteDifferences) { EXPECT_LE(testing::gradient_fd_max_rel_error(60, 72), 1e-4); }

TEST(FitHyperparams, NeverDecreasesMarginalLikelihood) {
  RngStream rng(73, 0);
  for (int t = 0; t < 10; ++t) {
    auto s = random_surrogate(1 + static_cast<std::size_t>(t % 3), 2, 30, rng);
    s.initialize_hyperparams();
    for (std::size_t j = 0; j < 2; ++j) {
      const double before = s.log_marginal_likelihood(j, s.packed_log_hyperparams(j));
      const auto r = s.fit(j, 25);
      const double after = s.log_marginal_likelihood(j, s.packed_log_hyperparams(j));
      EXPECT_FALSE(r.aborted) << r.message;
      EXPECT_GE(after, before - 1e-9);
      EXPECT_GE(r.lml_after, r.lml_before);
      EXPECT_GE(s.noise_variance(j), s.noise_floor(j) * (1.0 - 1e-12));
    }
  }
}

TEST(FitHyperparams, TooFewPointsIsReported) {
  SurrogateState s(1, 1);
  s.insert(scalar(0.0), scalar(1.0));
  const auto r = s.fit(0, 10);
  EXPECT_TRUE(r.aborted);
  EXPECT_EQ(r.steps_taken, 0);
}

TEST(FitHyperparams, RecoversLengthScaleOfKnownGp) {
  const double true_ls = 0.5;
  const int n = 200;
  RngStream rng(74, 0);
  Matrix k(n, n);
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = 10.0 * rng.uniform();
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double d = (xs[static_cast<std::size_t>(r)] - xs[static_cast<std::size_t>(c)]) / true_ls;
      k(r, c) = std::exp(-0.5 * d * d) + (r == c ? 0.01 : 0.0);
    }
  }
  const Vector y = mvn_draw(Vector::Zero(n), psd_sqrt(k), rng);
  SurrogateState s(1, 1);
  for (int i = 0; i < n; ++i) s.insert(scalar(xs[static_cast<std::size_t>(i)]), scalar(y[i]));
  s.initialize_hyperparams();
  s.fit(0, 300);
  const double ls = s.hyperparams(0).length_scales[0];
  EXPECT_GT(ls, true_ls / 2.0);
  EXPECT_LT(ls, true_ls * 2.0);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  RngStream rng(75, 0);
  SurrogateOptions opt;
  opt.transforms = {OutputTransform::kIdentity, OutputTransform::kLog1p};
  SurrogateState s(3, 2, opt);
  for (int i = 0; i < 25; ++i) {
    Vector x(2);
    x << rng.standard_normal(), std::exp(rng.standard_normal());
    s.insert(random_point(3, rng), x);
  }
  s.initialize_hyperparams();
  fit_hyperparams(s, 5);
  std::stringstream buffer;
  save_surrogate(s, buffer);
  const auto back = load_surrogate(buffer);
  EXPECT_EQ(back.inputs(), s.inputs());
  EXPECT_EQ(back.raw_outputs(), s.raw_outputs());
  EXPECT_EQ(back.outputs(), s.outputs());
  auto cold = s;
  cold.rebuild();
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_EQ(back.packed_log_hyperparams(j), s.packed_log_hyperparams(j));
    EXPECT_EQ(back.transform(j), s.transform(j));
    const Vector a = random_point(3, rng);
    const Vector b = random_point(3, rng);
    EXPECT_EQ(back.predict(j, a, b).mean, cold.predict(j, a, b).mean);
    EXPECT_EQ(back.predict(j, a, b).covariance, cold.predict(j, a, b).covariance);
  }
}

TEST(Checkpoint, MalformedInputReportsLine) {
  std::stringstream bad("gpsabc-surrogate 1\ndims 1 1 1\nnoise_floor_fraction 1e-6\ntransforms identity\nhyper 0 1 1 zebra\n");
  try {
    (void)load_surrogate(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
  std::stringstream version("gpsabc-surrogate 2\n");
  EXPECT_THROW((void)load_surrogate(version), ParseError);
}

}  // namespace
}  // namespace gpsabc
