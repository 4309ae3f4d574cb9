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
#include <limits>
#include <span>
#include <vector>

#include "gpsabc/errors.hpp"

namespace gpsabc {

/// The four log terms of a Metropolis-Hastings ratio.
/// log_proposal_ratio is log q(theta | theta') - log q(theta' | theta).
struct AcceptanceRatioParts {
  double log_prior_ratio = 0.0;
  double log_proposal_ratio = 0.0;
  double log_lik_proposed = 0.0;
  double log_lik_current = 0.0;
};

/// min(1, exp(log ratio)). A proposed log-likelihood of -inf gives 0; a
/// current log-likelihood of -inf (with a finite proposal) gives 1.
inline double alpha_from_parts(const AcceptanceRatioParts& p) {
  if (std::isnan(p.log_prior_ratio) || std::isnan(p.log_proposal_ratio) || std::isnan(p.log_lik_proposed) ||
      std::isnan(p.log_lik_current)) {
    throw InvalidArgument("alpha_from_parts: NaN in acceptance ratio");
  }
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (p.log_lik_proposed == kNegInf || p.log_prior_ratio == kNegInf) return 0.0;
  if (p.log_lik_current == kNegInf) return 1.0;
  const double log_ratio = p.log_prior_ratio + p.log_proposal_ratio + p.log_lik_proposed - p.log_lik_current;
  if (std::isnan(log_ratio)) throw InvalidArgument("alpha_from_parts: undefined ratio");
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

/// Lower median: the order statistic at index (M - 1) / 2, always a sample value.
inline double lower_median(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("median of empty ensemble");
  std::vector<double> v(values.begin(), values.end());
  const auto k = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

/// Probability of a wrong decision given the uniform draw u:
/// u <= tau accepts, so the error is P(alpha < u); otherwise P(alpha >= u).
inline double conditional_error(std::span<const double> alphas, double u, double tau) {
  if (alphas.empty()) return 0.0;
  std::size_t count = 0;
  if (u <= tau) {
    for (double a : alphas) count += a < u ? 1 : 0;
  } else {
    for (double a : alphas) count += a >= u ? 1 : 0;
  }
  return static_cast<double>(count) / static_cast<double>(alphas.size());
}

/// Midpoint-rule integral of conditional_error over u in [0, 1].
inline double unconditional_error(std::span<const double> alphas, double tau, int grid_size = 201) {
  if (grid_size < 2) throw InvalidArgument("unconditional_error: grid size must be >= 2");
  if (alphas.empty()) return 0.0;
  std::vector<double> sorted(alphas.begin(), alphas.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  double total = 0.0;
  for (int i = 0; i < grid_size; ++i) {
    const double u = (i + 0.5) / grid_size;
    if (u <= tau) {
      const auto below = std::lower_bound(sorted.begin(), sorted.end(), u) - sorted.begin();
      total += static_cast<double>(below) / m;
    } else {
      const auto at_or_above = sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), u);
      total += static_cast<double>(at_or_above) / m;
    }
  }
  return total / grid_size;
}

/// M Monte Carlo acceptance probabilities with their decision threshold and error.
struct AcceptanceEnsemble {
  std::vector<double> alphas;
  double tau = 0.0;
  double error = 0.0;

  /// max(alpha) - min(alpha)
  [[nodiscard]] double width() const {
    if (alphas.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(alphas.begin(), alphas.end());
    return *hi - *lo;
  }
};

inline AcceptanceEnsemble make_ensemble(std::vector<double> alphas, int grid_size = 201) {
  AcceptanceEnsemble e;
  e.tau = lower_median(alphas);
  e.error = unconditional_error(alphas, e.tau, grid_size);
  e.alphas = std::move(alphas);
  return e;
}

enum class Decision { kAccept, kReject };

/// Accept iff u <= tau.
inline Decision mh_decide(const AcceptanceEnsemble& ens, double u) {
  return u <= ens.tau ? Decision::kAccept : Decision::kReject;
}

}  // namespace gpsabc
