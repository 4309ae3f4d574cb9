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
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "gpsabc/errors.hpp"

namespace gpsabc {

inline double sample_mean(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Standard deviation with the 1/n divisor; 0 for n < 2.
inline double sample_std(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

/// Linear-interpolation quantile on the sorted sample (Hyndman-Fan type 7).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile level must be in [0, 1]");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Effective sample size from overlapping batch means with batch length
/// floor(sqrt(n)). Zero-variance chains report 1; the result never exceeds n.
inline double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  const double mean = sample_mean(x);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n > 1 ? n - 1 : 1);
  if (!(var > 0.0)) return 1.0;
  const auto b = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n)))));
  if (b >= n) return static_cast<double>(n);
  const std::size_t batches = n - b + 1;
  double window = 0.0;
  for (std::size_t i = 0; i < b; ++i) window += x[i];
  double ss = 0.0;
  for (std::size_t i = 0;; ++i) {
    const double bm = window / static_cast<double>(b);
    ss += (bm - mean) * (bm - mean);
    if (i + 1 == batches) break;
    window += x[i + b] - x[i];
  }
  const auto nd = static_cast<double>(n);
  const auto bd = static_cast<double>(b);
  const double sigma2 = nd * bd / ((nd - bd) * (nd - bd + 1.0)) * ss;
  if (!(sigma2 > 0.0)) return nd;
  return std::clamp(nd * var / sigma2, 1.0, nd);
}

/// Complementary Kolmogorov distribution Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value and the
/// Stephens small-sample correction.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("KS test needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [min, max]; the last bin is closed. A constant
/// sample gets one unit-width bin centred on the value.
inline Histogram histogram(std::span<const double> x, int bins = 30) {
  if (x.empty() || bins < 1) throw InvalidArgument("histogram needs data and at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
    bins = 1;
  }
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int k = 0; k <= bins; ++k) h.edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / bins;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : x) {
    auto k = static_cast<int>((v - lo) / (hi - lo) * bins);
    k = std::clamp(k, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(k)];
  }
  return h;
}

inline constexpr std::array<double, 5> kSummaryQuantiles{0.05, 0.25, 0.50, 0.75, 0.95};

/// Per-dimension marginal summary of a chain.
struct MarginalSummary {
  double mean = 0.0;
  double std = 0.0;
  std::array<double, 5> quantiles{};
  double ess = 0.0;
};

inline MarginalSummary summarize_marginal(std::span<const double> x) {
  MarginalSummary s;
  s.mean = sample_mean(x);
  s.std = sample_std(x);
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t q = 0; q < kSummaryQuantiles.size(); ++q) s.quantiles[q] = quantile_sorted(sorted, kSummaryQuantiles[q]);
  s.ess = effective_sample_size(x);
  return s;
}

}  // namespace gpsabc
