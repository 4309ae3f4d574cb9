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

// Small simulators and chain runners used as fixtures by the unit suite and
// the acceptance gate.

#pragma once

#include <cmath>
#include <vector>

#include "gpsabc/diagnostics.hpp"
#include "gpsabc/samplers.hpp"

namespace gpsabc::testing {

/// One parameter, one statistic x ~ N(0, 1) regardless of theta.
class NoiseOnly final : public Simulator {
 public:
  NoiseOnly() {
    spec_.param_dim = 1;
    spec_.stat_dim = 1;
    spec_.param_names = {"theta"};
    spec_.stat_names = {"x"};
    spec_.transforms = {SamplingTransform::kIdentity};
  }
  [[nodiscard]] const SimulatorSpec& spec() const noexcept override { return spec_; }
  [[nodiscard]] StatVector simulate_native(const ParamVector&, RngStream& rng) const override {
    return StatVector::Constant(1, rng.standard_normal());
  }

 private:
  SimulatorSpec spec_;
};

/// x = theta + noise_std * N(0, 1); fails with non-finite output above fail_above.
class NoisyIdentity final : public Simulator {
 public:
  explicit NoisyIdentity(double noise_std, double fail_above = INFINITY) : noise_std_(noise_std), fail_above_(fail_above) {
    spec_.param_dim = 1;
    spec_.stat_dim = 1;
    spec_.param_names = {"theta"};
    spec_.stat_names = {"x"};
    spec_.transforms = {SamplingTransform::kIdentity};
  }
  [[nodiscard]] const SimulatorSpec& spec() const noexcept override { return spec_; }
  [[nodiscard]] StatVector simulate_native(const ParamVector& theta, RngStream& rng) const override {
    if (theta[0] > fail_above_) return StatVector::Constant(1, std::nan(""));
    return StatVector::Constant(1, theta[0] + noise_std_ * rng.standard_normal());
  }

 private:
  double noise_std_;
  double fail_above_;
  SimulatorSpec spec_;
};

/// Config for a 1-D chain on a N(0.5, 1) prior with unit random-walk steps.
inline RunConfig prior_targeting_config(SamplerKind kind, std::uint64_t seed) {
  RunConfig cfg;
  cfg.sampler = kind;
  cfg.seed = seed;
  cfg.prior = Prior({NormalPrior{0.5, 1.0}});
  cfg.proposal.stds = Vector::Ones(1);
  cfg.init = Vector::Constant(1, 0.5);
  cfg.chain_length = 20000;
  cfg.burn_in = 1000;
  switch (kind) {
    case SamplerKind::kKernelMarginal:
    case SamplerKind::kKernelPseudoMarginal:
      cfg.S0 = 1;
      cfg.epsilon = 1.0;
      break;
    case SamplerKind::kAdaptiveSyntheticLikelihood:
      cfg.S0 = 5;
      cfg.xi = 0.2;
      break;
    case SamplerKind::kGpSurrogate:
      cfg.S0 = 20;
      cfg.xi = 0.2;
      break;
  }
  return cfg;
}

struct PriorTargetingResult {
  KsResult ks;
  std::size_t samples = 0;
  std::uint64_t calls = 0;
};

/// Runs a sampler against NoiseOnly, thins the chain to near-independence and
/// compares it with direct prior draws by a two-sample KS test.
inline PriorTargetingResult prior_targeting(SamplerKind kind, std::uint64_t seed, int thin = 20) {
  const NoiseOnly sim;
  const RunConfig cfg = prior_targeting_config(kind, seed);
  const auto out = run_chain(cfg, sim, Vector::Zero(1));
  std::vector<double> chain;
  for (std::size_t i = 0; i < out.samples.size(); i += static_cast<std::size_t>(thin)) chain.push_back(out.samples[i][0]);
  RngStream rng(seed, 1u << 20);
  std::vector<double> direct;
  for (std::size_t i = 0; i < chain.size(); ++i) direct.push_back(cfg.prior.sample(rng)[0]);
  return {ks_two_sample(chain, direct), chain.size(), out.total_calls};
}

}  // namespace gpsabc::testing
