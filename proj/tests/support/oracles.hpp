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

// Closed-form test oracles that do not share code with the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace gpsabc::testing {

/// Exact integral over u in [0, 1] of the folded-CDF error: the mean absolute
/// deviation of the alphas about tau.
inline double mad_error(const std::vector<double>& alphas, double tau) {
  double s = 0.0;
  for (double a : alphas) s += std::abs(std::clamp(a, 0.0, 1.0) - tau);
  return s / static_cast<double>(alphas.size());
}

/// Brute-force posterior moments of an exponential rate under a Gamma(a, b)
/// prior from N observations with mean ybar, by normalizing likelihood times
/// prior on a log-rate grid.
struct GridMoments {
  double mean = 0.0;
  double std = 0.0;
};

inline GridMoments exponential_grid_posterior(double a, double b, int n, double ybar, int points = 400001) {
  // Bracket the mass generously around the mode in log space.
  const double shape = a + n;
  const double rate = b + n * ybar;
  const double centre = std::log(shape / rate);
  const double half = 12.0 / std::sqrt(shape);
  const double lo = centre - half;
  const double h = 2.0 * half / (points - 1);
  std::vector<double> logw(static_cast<std::size_t>(points));
  double peak = -INFINITY;
  for (int i = 0; i < points; ++i) {
    const double s = lo + i * h;
    const double theta = std::exp(s);
    // log prior(theta) + log lik + log Jacobian of theta = e^s
    const double lw = (a - 1.0) * s - b * theta + n * s - theta * n * ybar + s;
    logw[static_cast<std::size_t>(i)] = lw;
    peak = std::max(peak, lw);
  }
  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < points; ++i) {
    const double w = std::exp(logw[static_cast<std::size_t>(i)] - peak) * ((i == 0 || i == points - 1) ? 0.5 : 1.0);
    const double theta = std::exp(lo + i * h);
    z += w;
    m1 += w * theta;
    m2 += w * theta * theta;
  }
  GridMoments g;
  g.mean = m1 / z;
  g.std = std::sqrt(std::max(0.0, m2 / z - g.mean * g.mean));
  return g;
}

}  // namespace gpsabc::testing
