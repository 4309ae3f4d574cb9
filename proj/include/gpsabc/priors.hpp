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
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "gpsabc/mvn.hpp"
#include "gpsabc/rng.hpp"

namespace gpsabc {

// All priors are densities over the sampling coordinate s.

/// psi'(a) for a > 0: recurrence up to a >= 12, then the asymptotic series.
inline double trigamma(double a) {
  double acc = 0.0;
  while (a < 12.0) {
    acc += 1.0 / (a * a);
    a += 1.0;
  }
  const double inv = 1.0 / a;
  const double inv2 = inv * inv;
  return acc + inv + 0.5 * inv2 +
         inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0))));
}

/// s ~ N(mean, std^2). For a log-transformed dimension this is a log-normal prior on theta.
struct NormalPrior {
  double mean = 0.0;
  double std = 1.0;
};

/// theta = exp(s) ~ Gamma(shape, rate); the density over s includes the
/// |d theta / d s| = exp(s) Jacobian.
struct LogGammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

/// s ~ U(lower, upper).
struct UniformPrior {
  double lower = 0.0;
  double upper = 1.0;
};

using PriorComponent = std::variant<NormalPrior, LogGammaPrior, UniformPrior>;

/// Independent product prior over the sampling space.
class Prior {
 public:
  Prior() = default;
  explicit Prior(std::vector<PriorComponent> components) : components_(std::move(components)) {
    for (const auto& c : components_) validate(c);
  }

  [[nodiscard]] std::size_t dim() const noexcept { return components_.size(); }
  [[nodiscard]] const std::vector<PriorComponent>& components() const noexcept { return components_; }

  [[nodiscard]] double log_density(const Vector& s) const {
    if (static_cast<std::size_t>(s.size()) != dim()) throw InvalidArgument("prior: dimension mismatch");
    double total = 0.0;
    for (std::size_t d = 0; d < dim(); ++d) {
      total += std::visit([&](const auto& c) { return component_log_density(c, s[static_cast<Eigen::Index>(d)]); },
                          components_[d]);
      if (total == -std::numeric_limits<double>::infinity()) return total;
    }
    return total;
  }

  Vector sample(RngStream& rng) const {
    Vector s(static_cast<Eigen::Index>(dim()));
    for (std::size_t d = 0; d < dim(); ++d) {
      s[static_cast<Eigen::Index>(d)] = std::visit([&](const auto& c) { return component_sample(c, rng); }, components_[d]);
    }
    return s;
  }

  /// Per-dimension standard deviation over the sampling coordinate (used to size proposals).
  [[nodiscard]] Vector sampling_std() const {
    Vector out(static_cast<Eigen::Index>(dim()));
    for (std::size_t d = 0; d < dim(); ++d) {
      out[static_cast<Eigen::Index>(d)] = std::visit(
          [](const auto& c) -> double {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, NormalPrior>) {
              return c.std;
            } else if constexpr (std::is_same_v<T, UniformPrior>) {
              return (c.upper - c.lower) / std::sqrt(12.0);
            } else {
              // Var[log G] = trigamma(shape)
              return std::sqrt(trigamma(c.shape));
            }
          },
          components_[d]);
    }
    return out;
  }

 private:
  static void validate(const PriorComponent& c) {
    std::visit(
        [](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, NormalPrior>) {
            if (!(p.std > 0.0) || !std::isfinite(p.mean)) throw InvalidArgument("normal prior: std must be positive");
          } else if constexpr (std::is_same_v<T, LogGammaPrior>) {
            if (!(p.shape > 0.0) || !(p.rate > 0.0)) throw InvalidArgument("gamma prior: shape and rate must be positive");
          } else {
            if (!(p.upper > p.lower)) throw InvalidArgument("uniform prior: upper must exceed lower");
          }
        },
        c);
  }

  static double component_log_density(const NormalPrior& p, double s) {
    return normal_logpdf(s, p.mean, p.std * p.std);
  }
  static double component_log_density(const LogGammaPrior& p, double s) {
    return p.shape * std::log(p.rate) - std::lgamma(p.shape) + p.shape * s - p.rate * std::exp(s);
  }
  static double component_log_density(const UniformPrior& p, double s) {
    if (s < p.lower || s > p.upper) return -std::numeric_limits<double>::infinity();
    return -std::log(p.upper - p.lower);
  }

  static double component_sample(const NormalPrior& p, RngStream& rng) { return normal_draw(rng, p.mean, p.std); }
  static double component_sample(const LogGammaPrior& p, RngStream& rng) {
    return log_gamma_draw(rng, p.shape, p.rate);
  }
  static double component_sample(const UniformPrior& p, RngStream& rng) {
    return p.lower + (p.upper - p.lower) * rng.uniform();
  }

  std::vector<PriorComponent> components_;
};

}  // namespace gpsabc
