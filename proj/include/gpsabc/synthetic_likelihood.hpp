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

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "gpsabc/errors.hpp"
#include "gpsabc/mvn.hpp"
#include "gpsabc/rng.hpp"

namespace gpsabc {

/// Sample mean and unbiased covariance of S simulations at one parameter.
struct MomentEstimate {
  Vector mu_hat;
  Matrix sigma_hat;
  std::size_t count = 0;
  bool diagonal_only = false;
};

/// Gaussian ABC kernel bandwidth; zero means exact matching.
struct EpsilonKernel {
  double epsilon = 0.0;
};

/// Batch moments. Rows are processed in lexicographic order, so the result
/// does not depend on the order of the batch at all.
inline MomentEstimate estimate_moments(std::span<const Vector> batch, bool diagonal_only = false) {
  if (batch.size() < 2) throw InsufficientSamples("estimate_moments: need at least 2 samples");
  const auto j = batch.front().size();
  std::vector<const Vector*> order;
  order.reserve(batch.size());
  for (const auto& x : batch) {
    if (x.size() != j) throw InvalidArgument("estimate_moments: inconsistent statistic dimension");
    if (!x.allFinite()) throw InvalidArgument("estimate_moments: non-finite statistics");
    order.push_back(&x);
  }
  std::sort(order.begin(), order.end(), [](const Vector* a, const Vector* b) {
    return std::lexicographical_compare(a->begin(), a->end(), b->begin(), b->end());
  });

  const auto s = static_cast<double>(batch.size());
  MomentEstimate m;
  m.count = batch.size();
  m.diagonal_only = diagonal_only;
  m.mu_hat = Vector::Zero(j);
  for (const Vector* x : order) m.mu_hat += *x;
  m.mu_hat /= s;
  m.sigma_hat = Matrix::Zero(j, j);
  for (const Vector* x : order) {
    const Vector r = *x - m.mu_hat;
    m.sigma_hat.noalias() += r * r.transpose();
  }
  m.sigma_hat /= (s - 1.0);
  if (diagonal_only) m.sigma_hat = Matrix(m.sigma_hat.diagonal().asDiagonal());
  return m;
}

/// Streaming moments (Chan et al. pairwise update) so refinement rounds can
/// fold new simulations without revisiting old ones.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(Eigen::Index dim = 0) : mean_(Vector::Zero(dim)), scatter_(Matrix::Zero(dim, dim)) {}

  void add(const Vector& x) {
    if (count_ == 0 && mean_.size() == 0) {
      mean_ = Vector::Zero(x.size());
      scatter_ = Matrix::Zero(x.size(), x.size());
    }
    if (x.size() != mean_.size()) throw InvalidArgument("MomentAccumulator: dimension mismatch");
    ++count_;
    const Vector delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    scatter_.noalias() += delta * (x - mean_).transpose();
  }

  void merge(const MomentAccumulator& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const auto n1 = static_cast<double>(count_);
    const auto n2 = static_cast<double>(other.count_);
    const double n = n1 + n2;
    const Vector delta = other.mean_ - mean_;
    mean_ += delta * (n2 / n);
    scatter_ += other.scatter_ + delta * delta.transpose() * (n1 * n2 / n);
    count_ += other.count_;
  }

  [[nodiscard]] std::size_t count() const noexcept { return count_; }

  [[nodiscard]] MomentEstimate estimate(bool diagonal_only = false) const {
    if (count_ < 2) throw InsufficientSamples("MomentAccumulator: need at least 2 samples");
    MomentEstimate m;
    m.count = count_;
    m.diagonal_only = diagonal_only;
    m.mu_hat = mean_;
    // Symmetrize: the one-pass update accumulates round-off asymmetrically.
    m.sigma_hat = 0.5 * (scatter_ + scatter_.transpose()) / static_cast<double>(count_ - 1);
    if (diagonal_only) m.sigma_hat = Matrix(m.sigma_hat.diagonal().asDiagonal());
    return m;
  }

 private:
  std::size_t count_ = 0;
  Vector mean_;
  Matrix scatter_;
};

/// Sigma_hat + eps^2 I, the covariance of the kernel-integrated synthetic likelihood.
inline Matrix synthetic_covariance(const MomentEstimate& m, const EpsilonKernel& k) {
  Matrix c = m.sigma_hat;
  c.diagonal().array() += k.epsilon * k.epsilon;
  return c;
}

/// log N(y; mu_hat, Sigma_hat + eps^2 I), ridge policy applied after adding eps^2 I.
inline double synthetic_loglik(const Vector& y, const MomentEstimate& m, const EpsilonKernel& k,
                               const RidgePolicy& policy = {}) {
  if (y.size() != m.mu_hat.size()) throw InvalidArgument("synthetic_loglik: dimension mismatch");
  return mvn_logpdf(y, m.mu_hat, cholesky_with_ridge(synthetic_covariance(m, k), policy));
}

/// One draw of the unknown mean: mu ~ N(mu_hat, Sigma_hat / S).
inline Vector sample_mean_posterior(const MomentEstimate& m, RngStream& rng) {
  if (m.count < 2) throw InsufficientSamples("sample_mean_posterior: need S >= 2");
  return mvn_draw(m.mu_hat, psd_sqrt(m.sigma_hat / static_cast<double>(m.count)), rng);
}

/// Log of the Gaussian ABC kernel K_eps(y, x) = N(x; y, eps^2 I).
inline double log_gaussian_kernel(const Vector& y, const Vector& x, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("kernel bandwidth must be positive");
  const auto j = static_cast<double>(y.size());
  return -0.5 * j * (kLog2Pi + 2.0 * std::log(epsilon)) - 0.5 * (x - y).squaredNorm() / (epsilon * epsilon);
}

}  // namespace gpsabc
