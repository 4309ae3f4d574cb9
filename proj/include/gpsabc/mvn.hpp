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

#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "gpsabc/errors.hpp"
#include "gpsabc/rng.hpp"

namespace gpsabc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// Ridge escalation for covariance factorizations: try the matrix as is, then
/// add jitter starting at 1e-9 * mean(diag) and growing by 10x up to
/// 1e-3 * mean(diag).
struct RidgePolicy {
  double first = 1e-9;
  double last = 1e-3;
  double growth = 10.0;
};

/// Lower Cholesky factor plus the ridge that made it succeed.
struct CholeskyFactor {
  Matrix lower;
  double ridge = 0.0;

  [[nodiscard]] double log_det() const { return 2.0 * lower.diagonal().array().log().sum(); }
};

inline CholeskyFactor cholesky_with_ridge(const Matrix& a, const RidgePolicy& policy = {}) {
  if (a.rows() != a.cols()) throw InvalidArgument("cholesky: matrix must be square");
  const auto n = a.rows();
  if (n == 0) return {Matrix(0, 0), 0.0};
  if (!a.allFinite()) throw NumericalDegeneracy("cholesky: non-finite matrix entries", 0.0);

  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};

  const double scale = a.diagonal().mean();
  double ridge = 0.0;
  if (scale > 0.0) {
    for (double factor = policy.first; factor <= policy.last * (1.0 + 1e-12); factor *= policy.growth) {
      ridge = factor * scale;
      Matrix jittered = a;
      jittered.diagonal().array() += ridge;
      llt.compute(jittered);
      if (llt.info() == Eigen::Success) return {llt.matrixL(), ridge};
    }
  }
  throw NumericalDegeneracy("cholesky: matrix not positive definite after maximum ridge", ridge);
}

/// Mean and covariance of a multivariate normal.
struct MvnParams {
  Vector mean;
  Matrix covariance;
};

/// Log density through a triangular factor; never forms an inverse.
inline double mvn_logpdf(const Vector& x, const Vector& mean, const CholeskyFactor& factor) {
  const Vector r = x - mean;
  const Vector z = factor.lower.triangularView<Eigen::Lower>().solve(r);
  const auto j = static_cast<double>(x.size());
  return -0.5 * z.squaredNorm() - 0.5 * factor.log_det() - 0.5 * j * kLog2Pi;
}

inline double mvn_logpdf(const Vector& x, const MvnParams& p, const RidgePolicy& policy = {}) {
  if (x.size() != p.mean.size() || p.covariance.rows() != x.size() || p.covariance.cols() != x.size()) {
    throw InvalidArgument("mvn_logpdf: dimension mismatch");
  }
  return mvn_logpdf(x, p.mean, cholesky_with_ridge(p.covariance, policy));
}

inline double normal_logpdf(double x, double mean, double variance) {
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(variance) + r * r / variance);
}

/// Square root S with S S^T = C for a symmetric PSD C, built from a pivoted
/// LDL^T so that singular (even zero) covariances are handled exactly.
inline Matrix psd_sqrt(const Matrix& c) {
  const auto n = c.rows();
  if (n == 0) return Matrix(0, 0);
  if (!c.allFinite()) throw NumericalDegeneracy("psd_sqrt: non-finite covariance", 0.0);
  if (c.isZero(0.0)) return Matrix::Zero(n, n);
  Eigen::LDLT<Matrix> ldlt(c);
  if (ldlt.info() != Eigen::Success) throw NumericalDegeneracy("psd_sqrt: LDLT failed", 0.0);
  const Vector d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Matrix l = ldlt.matrixL();
  Matrix s = ldlt.transpositionsP().transpose() * (l * d.asDiagonal());
  return s;
}

/// One draw from N(mean, sqrt sqrt^T).
inline Vector mvn_draw(const Vector& mean, const Matrix& sqrt, RngStream& rng) {
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.standard_normal();
  return mean + sqrt * z;
}

}  // namespace gpsabc
