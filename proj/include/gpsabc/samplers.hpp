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
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gpsabc/acceptance.hpp"
#include "gpsabc/errors.hpp"
#include "gpsabc/gp_surrogate.hpp"
#include "gpsabc/mvn.hpp"
#include "gpsabc/priors.hpp"
#include "gpsabc/rng.hpp"
#include "gpsabc/simulators.hpp"
#include "gpsabc/synthetic_likelihood.hpp"

namespace gpsabc {

enum class SamplerKind { kKernelMarginal, kKernelPseudoMarginal, kAdaptiveSyntheticLikelihood, kGpSurrogate };

inline const char* sampler_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::kKernelMarginal:
      return "kernel-marginal";
    case SamplerKind::kKernelPseudoMarginal:
      return "kernel-pseudo-marginal";
    case SamplerKind::kAdaptiveSyntheticLikelihood:
      return "asl";
    case SamplerKind::kGpSurrogate:
      return "gps";
  }
  return "unknown";
}

inline SamplerKind parse_sampler(const std::string& name) {
  if (name == "kernel-marginal") return SamplerKind::kKernelMarginal;
  if (name == "kernel-pseudo-marginal") return SamplerKind::kKernelPseudoMarginal;
  if (name == "asl") return SamplerKind::kAdaptiveSyntheticLikelihood;
  if (name == "gps") return SamplerKind::kGpSurrogate;
  throw ConfigError("unknown sampler: " + name);
}

// ---------------------------------------------------------------------------
// Proposals

/// Symmetric random-walk proposals in sampling space.
struct ProposalSpec {
  enum class Kind { kGaussian, kSingleCoordinate };
  Kind kind = Kind::kGaussian;
  Vector stds;

  [[nodiscard]] ParamVector propose(const ParamVector& s, RngStream& rng) const {
    ParamVector out = s;
    if (kind == Kind::kGaussian) {
      for (Eigen::Index d = 0; d < s.size(); ++d) out[d] = normal_draw(rng, s[d], stds[d]);
    } else {
      const auto d = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(s.size()));
      out[d] = normal_draw(rng, s[d], stds[d]);
    }
    return out;
  }

  /// log q(to | from). Single-coordinate moves are densities w.r.t. the
  /// changed coordinate only; moves that change != 1 coordinate get -inf.
  [[nodiscard]] double log_density(const ParamVector& from, const ParamVector& to) const {
    if (kind == Kind::kGaussian) {
      double total = 0.0;
      for (Eigen::Index d = 0; d < from.size(); ++d) total += normal_logpdf(to[d], from[d], stds[d] * stds[d]);
      return total;
    }
    Eigen::Index changed = -1;
    for (Eigen::Index d = 0; d < from.size(); ++d) {
      if (to[d] != from[d]) {
        if (changed >= 0) return -std::numeric_limits<double>::infinity();
        changed = d;
      }
    }
    if (changed < 0) return -std::numeric_limits<double>::infinity();
    return -std::log(static_cast<double>(from.size())) + normal_logpdf(to[changed], from[changed], stds[changed] * stds[changed]);
  }

  /// Both kinds are symmetric, so log q(theta | theta') - log q(theta' | theta) = 0.
  [[nodiscard]] static constexpr double log_ratio() noexcept { return 0.0; }
};

// ---------------------------------------------------------------------------
// Configuration

/// Surrogate settings. Fits run after every insertion for the first
/// early_insertions acquisitions, then every late_interval-th; the interval
/// never drops below floor(interval_fraction * N).
struct GpConfig {
  std::vector<OutputTransform> transforms;
  int fit_steps = 20;
  int initial_fit_steps = 20;
  int early_insertions = 50;
  int late_interval = 10;
  double interval_fraction = 0.1;
  double noise_floor_fraction = 1e-6;
  bool acquire = true;

  [[nodiscard]] bool fit_due(std::uint64_t acquisitions, std::size_t n) const {
    if (fit_steps <= 0 || acquisitions == 0) return false;
    std::uint64_t interval = acquisitions <= static_cast<std::uint64_t>(early_insertions) ? 1 : static_cast<std::uint64_t>(late_interval);
    interval = std::max<std::uint64_t>(interval, static_cast<std::uint64_t>(interval_fraction * static_cast<double>(n)));
    return acquisitions % std::max<std::uint64_t>(interval, 1) == 0;
  }
};

struct RunConfig {
  SamplerKind sampler = SamplerKind::kAdaptiveSyntheticLikelihood;
  int S0 = 5;          // S for the kernel samplers
  int delta_S = 10;
  double epsilon = 0.0;
  double xi = 0.05;    // ASL accepts xi >= 1 as fixed-S mode
  int M = 50;
  int chain_length = 10000;
  int burn_in = 1500;
  std::uint64_t seed = 1;
  Prior prior;
  ProposalSpec proposal;
  ParamVector init;    // sampling space
  bool diagonal_covariance = false;
  int grid_size = 201;
  std::uint64_t max_sims_per_step = 10000;
  int max_acquisitions_per_step = 50;
  GpConfig gp;

  [[nodiscard]] bool fixed_s_mode() const noexcept {
    return sampler == SamplerKind::kAdaptiveSyntheticLikelihood && xi >= 1.0;
  }

  /// Throws ConfigError on any out-of-range setting; no simulation runs before this passes.
  void validate(const SimulatorSpec& spec, const Vector& observed) const {
    const auto d = static_cast<Eigen::Index>(spec.param_dim);
    auto fail = [](const std::string& what) { throw ConfigError("invalid run config: " + what); };
    if (prior.dim() != spec.param_dim) fail("prior dimension does not match the simulator");
    if (proposal.stds.size() != d) fail("proposal std dimension does not match the simulator");
    if (!(proposal.stds.array() > 0.0).all()) fail("proposal stds must be positive");
    if (init.size() != d || !init.allFinite()) fail("init must be finite with one entry per parameter");
    if (static_cast<std::size_t>(observed.size()) != spec.stat_dim || !observed.allFinite()) {
      fail("observed statistics must be finite with one entry per statistic");
    }
    if (chain_length <= burn_in || burn_in < 0) fail("chain_length must exceed burn_in >= 0");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) fail("epsilon must be >= 0");
    if (M < 1) fail("M must be >= 1");
    if (grid_size < 2) fail("grid_size must be >= 2");
    if (prior.log_density(init) == -std::numeric_limits<double>::infinity()) fail("init has zero prior density");
    switch (sampler) {
      case SamplerKind::kKernelMarginal:
      case SamplerKind::kKernelPseudoMarginal:
        if (S0 < 1) fail("S must be >= 1");
        if (!(epsilon > 0.0)) fail("kernel samplers need epsilon > 0");
        break;
      case SamplerKind::kAdaptiveSyntheticLikelihood:
        if (S0 < 2) fail("S0 must be >= 2");
        if (delta_S < 1) fail("delta_S must be >= 1");
        if (!(xi > 0.0) || (xi > 0.5 && xi < 1.0)) fail("xi must be in (0, 0.5], or >= 1 for fixed-S mode");
        if (max_sims_per_step < static_cast<std::uint64_t>(2 * S0)) fail("max_sims_per_step below the initial batch");
        break;
      case SamplerKind::kGpSurrogate:
        if (S0 < 2) fail("S0 must be >= 2");
        if (!(xi > 0.0 && xi <= 0.5)) fail("xi must be in (0, 0.5]");
        if (max_acquisitions_per_step < 0) fail("max_acquisitions_per_step must be >= 0");
        if (!gp.transforms.empty() && gp.transforms.size() != spec.stat_dim) fail("one output transform per statistic");
        for (std::size_t j = 0; j < gp.transforms.size(); ++j) {
          if (!std::isfinite(warp(gp.transforms[j], observed[static_cast<Eigen::Index>(j)]))) {
            fail("observed statistic outside its output transform's domain");
          }
        }
        break;
    }
  }
};

// ---------------------------------------------------------------------------
// Chain bookkeeping

struct ChainEvent {
  std::uint64_t step = 0;
  std::string kind;  // simulation-failure, budget-breach, fit-aborted, degenerate-covariance
  std::string message;
};

struct StepRecord {
  std::uint64_t step = 0;
  bool accepted = false;
  double tau = 0.0;
  double error = 0.0;
  std::uint64_t sim_calls = 0;
  int rounds = 0;
  bool budget_breach = false;
  std::vector<double> widths;  // ensemble width per refinement round
};

/// theta is in sampling space. cached_loglik holds the pseudo-marginal
/// estimate for the current theta and is unused by the other samplers.
struct ChainState {
  ParamVector theta;
  double log_prior = 0.0;
  double cached_loglik = 0.0;
  std::uint64_t step = 0;
};

/// Everything a step needs besides its own state: the simulator, observed
/// statistics, a counter, the simulation stream source and the event log.
struct StepContext {
  const Simulator* simulator = nullptr;
  Vector observed;
  CallCounter* counter = nullptr;
  StreamFactory* streams = nullptr;
  std::vector<ChainEvent>* events = nullptr;

  /// One counted simulation on a fresh substream; nullopt on failure.
  std::optional<Vector> simulate_at(const ParamVector& s, std::uint64_t step) const {
    counter->increment();
    RngStream rng = streams->next();
    try {
      return simulate(*simulator, s, rng);
    } catch (const SimulationFailure& e) {
      log(step, "simulation-failure", e.what());
    } catch (const SimulatorDomainError& e) {
      log(step, "simulation-failure", e.what());
    }
    return std::nullopt;
  }

  void log(std::uint64_t step, std::string kind, std::string message) const {
    if (events) events->push_back({step, std::move(kind), std::move(message)});
  }
};

namespace detail {

inline double log_sum_exp(const std::vector<double>& v) {
  const double hi = *std::max_element(v.begin(), v.end());
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

/// log of (1/S) sum_s K_eps(y, x_s); -inf if any simulation failed.
inline double kernel_estimate(const StepContext& ctx, const ParamVector& s, int S, double eps, std::uint64_t step) {
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(S));
  bool failed = false;
  for (int i = 0; i < S; ++i) {
    auto x = ctx.simulate_at(s, step);
    if (!x) {
      failed = true;
      continue;
    }
    terms.push_back(log_gaussian_kernel(ctx.observed, *x, eps));
  }
  if (failed) return -std::numeric_limits<double>::infinity();
  return log_sum_exp(terms) - std::log(static_cast<double>(S));
}

/// Runs n simulations at s into acc; false if any failed.
inline bool simulate_into(const StepContext& ctx, const ParamVector& s, int n, MomentAccumulator& acc, std::uint64_t step) {
  bool ok = true;
  for (int i = 0; i < n; ++i) {
    auto x = ctx.simulate_at(s, step);
    if (x) {
      acc.add(*x);
    } else {
      ok = false;
    }
  }
  return ok;
}

/// Likelihood pieces of one side of an ASL ratio, fixed within a round.
struct SlSide {
  MomentEstimate moments;
  Matrix mean_sqrt;             // square root of Sigma_hat / S
  std::optional<CholeskyFactor> lik_factor;  // of Sigma_hat + eps^2 I; empty if degenerate
};

inline SlSide prepare_side(const MomentAccumulator& acc, const RunConfig& cfg) {
  SlSide side;
  side.moments = acc.estimate(cfg.diagonal_covariance);
  side.mean_sqrt = psd_sqrt(side.moments.sigma_hat / static_cast<double>(side.moments.count));
  try {
    side.lik_factor = cholesky_with_ridge(synthetic_covariance(side.moments, {cfg.epsilon}));
  } catch (const NumericalDegeneracy&) {
    side.lik_factor.reset();
  }
  return side;
}

inline double side_loglik(const Vector& y, const Vector& mu, const SlSide& side) {
  if (!side.lik_factor) return -std::numeric_limits<double>::infinity();
  return mvn_logpdf(y, mu, *side.lik_factor);
}

}  // namespace detail

/// Propose theta' and return it with its log prior; -inf prior means reject without simulating.
inline std::pair<ParamVector, double> propose(const ChainState& state, const RunConfig& cfg, RngStream& rng) {
  ParamVector next = cfg.proposal.propose(state.theta, rng);
  return {next, cfg.prior.log_density(next)};
}

inline void move_to(ChainState& state, ParamVector theta, double log_prior) {
  state.theta = std::move(theta);
  state.log_prior = log_prior;
}

// ---------------------------------------------------------------------------
// Kernel ABC

enum class KernelMode { kMarginal, kPseudoMarginal };

/// Ratio of S-sample kernel averages. Marginal mode re-simulates the current
/// state; pseudo-marginal mode reuses the stored estimate.
inline StepRecord kernel_abc_step(ChainState& state, const RunConfig& cfg, KernelMode mode, const StepContext& ctx,
                                  RngStream& rng) {
  StepRecord rec;
  rec.step = state.step;
  rec.rounds = 1;
  const std::uint64_t before = ctx.counter->total();
  auto [proposal, log_prior_prop] = propose(state, cfg, rng);
  if (log_prior_prop == -std::numeric_limits<double>::infinity()) {
    ++state.step;
    return rec;
  }
  AcceptanceRatioParts parts;
  parts.log_prior_ratio = log_prior_prop - state.log_prior;
  parts.log_proposal_ratio = ProposalSpec::log_ratio();
  parts.log_lik_proposed = detail::kernel_estimate(ctx, proposal, cfg.S0, cfg.epsilon, state.step);
  parts.log_lik_current = mode == KernelMode::kMarginal
                              ? detail::kernel_estimate(ctx, state.theta, cfg.S0, cfg.epsilon, state.step)
                              : state.cached_loglik;
  const double alpha = alpha_from_parts(parts);
  const double u = rng.uniform_open();
  rec.tau = alpha;
  rec.accepted = u <= alpha;
  if (rec.accepted) {
    move_to(state, std::move(proposal), log_prior_prop);
    state.cached_loglik = parts.log_lik_proposed;
  }
  rec.sim_calls = ctx.counter->total() - before;
  ++state.step;
  return rec;
}

// ---------------------------------------------------------------------------
// Adaptive synthetic likelihood

/// One MH step with randomized acceptance. Each round draws M mean pairs,
/// forms the alpha ensemble and stops once its error is below xi; otherwise
/// delta_S more simulations run at both locations. xi >= 1 evaluates the
/// point-estimate ratio once and accepts with u <= alpha.
inline StepRecord asl_abc_step(ChainState& state, const RunConfig& cfg, const StepContext& ctx, RngStream& rng) {
  StepRecord rec;
  rec.step = state.step;
  const std::uint64_t before = ctx.counter->total();
  auto [proposal, log_prior_prop] = propose(state, cfg, rng);
  if (log_prior_prop == -std::numeric_limits<double>::infinity()) {
    ++state.step;
    return rec;
  }
  const double log_prior_ratio = log_prior_prop - state.log_prior;
  const auto j = static_cast<Eigen::Index>(ctx.observed.size());
  MomentAccumulator acc_prop(j);
  MomentAccumulator acc_cur(j);

  auto finish = [&](double tau, double error, bool accept) {
    rec.tau = tau;
    rec.error = error;
    rec.accepted = accept;
    if (accept) move_to(state, std::move(proposal), log_prior_prop);
    rec.sim_calls = ctx.counter->total() - before;
    ++state.step;
    return rec;
  };

  int batch = cfg.S0;
  while (true) {
    ++rec.rounds;
    const bool prop_ok = detail::simulate_into(ctx, proposal, batch, acc_prop, state.step);
    const bool cur_ok = detail::simulate_into(ctx, state.theta, batch, acc_cur, state.step);
    // A failed simulation makes that side's likelihood -inf for the whole step.
    if (!prop_ok) return finish(0.0, 0.0, false);
    if (!cur_ok) return finish(1.0, 0.0, true);

    const detail::SlSide prop = detail::prepare_side(acc_prop, cfg);
    const detail::SlSide cur = detail::prepare_side(acc_cur, cfg);
    if (!prop.lik_factor || !cur.lik_factor) {
      ctx.log(state.step, "degenerate-covariance", "synthetic covariance not factorizable; side treated as -inf");
    }

    if (cfg.fixed_s_mode()) {
      AcceptanceRatioParts parts{log_prior_ratio, ProposalSpec::log_ratio(),
                                 detail::side_loglik(ctx.observed, prop.moments.mu_hat, prop),
                                 detail::side_loglik(ctx.observed, cur.moments.mu_hat, cur)};
      const double alpha = alpha_from_parts(parts);
      return finish(alpha, 0.0, rng.uniform_open() <= alpha);
    }

    std::vector<double> alphas(static_cast<std::size_t>(cfg.M));
    for (auto& a : alphas) {
      const Vector mu_prop = mvn_draw(prop.moments.mu_hat, prop.mean_sqrt, rng);
      const Vector mu_cur = mvn_draw(cur.moments.mu_hat, cur.mean_sqrt, rng);
      a = alpha_from_parts({log_prior_ratio, ProposalSpec::log_ratio(), detail::side_loglik(ctx.observed, mu_prop, prop),
                            detail::side_loglik(ctx.observed, mu_cur, cur)});
    }
    const AcceptanceEnsemble ens = make_ensemble(std::move(alphas), cfg.grid_size);
    rec.widths.push_back(ens.width());
    if (ens.error < cfg.xi) return finish(ens.tau, ens.error, mh_decide(ens, rng.uniform_open()) == Decision::kAccept);

    batch = cfg.delta_S;
    const std::uint64_t used = ctx.counter->total() - before;
    if (used + 2 * static_cast<std::uint64_t>(batch) > cfg.max_sims_per_step) {
      rec.budget_breach = true;
      ctx.log(state.step, "budget-breach", "simulation budget reached with error " + std::to_string(ens.error));
      return finish(ens.tau, ens.error, mh_decide(ens, rng.uniform_open()) == Decision::kAccept);
    }
  }
}

// ---------------------------------------------------------------------------
// GP surrogate

/// Observed statistics in the surrogate's model units.
inline Vector model_observation(const SurrogateState& s, const Vector& y) {
  Vector z(y.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) z[j] = s.model_observation(static_cast<std::size_t>(j), y[j]);
  return z;
}

/// Alpha ensemble from the frozen surrogate: M joint draws of the latent
/// means at (theta', theta) per statistic, each scored with variance
/// sigma_j^2 + eps^2. Pure apart from rng.
inline AcceptanceEnsemble gps_ensemble(const SurrogateState& s, const Vector& y_model, double epsilon, int M,
                                       double log_prior_ratio, double log_proposal_ratio, const ParamVector& theta,
                                       const ParamVector& theta_prime, RngStream& rng, int grid_size = 201) {
  const std::size_t J = s.stat_dim();
  std::vector<BivariatePredictive> pred(J);
  std::vector<Eigen::Matrix2d> roots(J);
  std::vector<double> lik_var(J);
  for (std::size_t j = 0; j < J; ++j) {
    pred[j] = s.predict(j, theta, theta_prime);
    roots[j] = psd_sqrt(pred[j].covariance);
    lik_var[j] = s.noise_variance(j) + epsilon * epsilon;
  }
  std::vector<double> alphas(static_cast<std::size_t>(M));
  for (auto& a : alphas) {
    double ll_prop = 0.0;
    double ll_cur = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const Eigen::Vector2d draw = mvn_draw(pred[j].mean, roots[j], rng);
      const double yj = y_model[static_cast<Eigen::Index>(j)];
      ll_prop += normal_logpdf(yj, draw[0], lik_var[j]);
      ll_cur += normal_logpdf(yj, draw[1], lik_var[j]);
    }
    a = alpha_from_parts({log_prior_ratio, log_proposal_ratio, ll_prop, ll_cur});
  }
  return make_ensemble(std::move(alphas), grid_size);
}

/// Surrogate plus acquisition bookkeeping carried across steps.
struct GpsModel {
  SurrogateState surrogate;
  Vector y_model;
  std::uint64_t acquisitions = 0;
};

/// Fits when the schedule says so; aborted fits are logged and leave the
/// hyperparameters untouched.
inline void maybe_fit(GpsModel& model, const GpConfig& gp, const StepContext& ctx, std::uint64_t step) {
  if (!gp.fit_due(model.acquisitions, model.surrogate.size())) return;
  for (const FitReport& r : fit_hyperparams(model.surrogate, gp.fit_steps)) {
    if (r.aborted) ctx.log(step, "fit-aborted", "statistic " + std::to_string(r.statistic) + ": " + r.message);
  }
}

/// S0 prior draws, one simulation each; failures are skipped. Then an
/// initial heuristic and fit.
inline GpsModel initialize_gps(const RunConfig& cfg, const StepContext& ctx, RngStream& rng) {
  const auto& spec = ctx.simulator->spec();
  SurrogateOptions opts;
  opts.transforms = cfg.gp.transforms;
  opts.noise_floor_fraction = cfg.gp.noise_floor_fraction;
  GpsModel model{SurrogateState(spec.param_dim, spec.stat_dim, opts), Vector(), 0};
  for (int i = 0; i < cfg.S0; ++i) {
    const ParamVector s = cfg.prior.sample(rng);
    auto x = ctx.simulate_at(s, 0);
    if (!x) continue;
    if (!model.surrogate.accepts(*x)) {
      ctx.log(0, "simulation-failure", "statistics outside the output transform's domain");
      continue;
    }
    model.surrogate.insert(s, *x);
  }
  if (model.surrogate.size() < 2) throw NumericalDegeneracy("surrogate initialization produced fewer than 2 usable points", 0.0);
  model.surrogate.initialize_hyperparams();
  for (const FitReport& r : fit_hyperparams(model.surrogate, cfg.gp.initial_fit_steps)) {
    if (r.aborted) ctx.log(0, "fit-aborted", "statistic " + std::to_string(r.statistic) + ": " + r.message);
  }
  model.y_model = model_observation(model.surrogate, ctx.observed);
  return model;
}

/// Simulates at loc and inserts it; false if the simulation or its warp failed.
inline bool acquire_at(GpsModel& model, const ParamVector& loc, const StepContext& ctx, std::uint64_t step) {
  auto x = ctx.simulate_at(loc, step);
  if (!x) return false;
  if (!model.surrogate.accepts(*x)) {
    ctx.log(step, "simulation-failure", "statistics outside the output transform's domain");
    return false;
  }
  model.surrogate.insert(loc, *x);
  return true;
}

/// One MH step against the surrogate. While the ensemble error is at least
/// xi a single training point is acquired at the more uncertain of theta and
/// theta', then the ensemble is redrawn.
inline StepRecord gps_abc_step(ChainState& state, const RunConfig& cfg, GpsModel& model, const StepContext& ctx,
                               RngStream& rng) {
  StepRecord rec;
  rec.step = state.step;
  const std::uint64_t before = ctx.counter->total();
  auto [proposal, log_prior_prop] = propose(state, cfg, rng);
  if (log_prior_prop == -std::numeric_limits<double>::infinity()) {
    ++state.step;
    return rec;
  }
  const double log_prior_ratio = log_prior_prop - state.log_prior;
  int attempts = 0;
  while (true) {
    ++rec.rounds;
    const AcceptanceEnsemble ens = gps_ensemble(model.surrogate, model.y_model, cfg.epsilon, cfg.M, log_prior_ratio,
                                                ProposalSpec::log_ratio(), state.theta, proposal, rng, cfg.grid_size);
    rec.widths.push_back(ens.width());
    bool stop = ens.error < cfg.xi || !cfg.gp.acquire;
    if (!stop && attempts >= cfg.max_acquisitions_per_step) {
      rec.budget_breach = true;
      ctx.log(state.step, "budget-breach", "acquisition budget reached with error " + std::to_string(ens.error));
      stop = true;
    }
    if (stop) {
      rec.tau = ens.tau;
      rec.error = ens.error;
      rec.accepted = mh_decide(ens, rng.uniform_open()) == Decision::kAccept;
      break;
    }
    ++attempts;
    const ParamVector loc = acquire_location(model.surrogate, state.theta, proposal);
    bool ok = acquire_at(model, loc, ctx, state.step);
    if (!ok) {
      const ParamVector& other = (loc.array() == proposal.array()).all() ? state.theta : proposal;
      ok = acquire_at(model, other, ctx, state.step);
    }
    if (ok) {
      ++model.acquisitions;
      maybe_fit(model, cfg.gp, ctx, state.step);
    }
  }
  if (rec.accepted) move_to(state, std::move(proposal), log_prior_prop);
  rec.sim_calls = ctx.counter->total() - before;
  ++state.step;
  return rec;
}

// ---------------------------------------------------------------------------
// Driver

struct ChainOutput {
  std::vector<ParamVector> samples;  // post burn-in, sampling space
  std::vector<StepRecord> records;   // every step
  std::vector<ChainEvent> events;
  std::uint64_t total_calls = 0;
  std::uint64_t init_calls = 0;
  std::optional<SurrogateState> surrogate;

  [[nodiscard]] double acceptance_rate() const {
    if (records.empty()) return 0.0;
    std::size_t n = 0;
    for (const auto& r : records) n += r.accepted ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(records.size());
  }
};

/// Validates cfg, then runs chain_length steps from cfg.init. The decision
/// stream is (seed, 0); every simulation draws a fresh substream (seed, k),
/// k >= 1, in call order, so a run is a pure function of (cfg, observed).
inline ChainOutput run_chain(const RunConfig& cfg, const Simulator& sim, const Vector& observed) {
  cfg.validate(sim.spec(), observed);
  ChainOutput out;
  CallCounter counter;
  StreamFactory streams(cfg.seed, 1);
  RngStream rng(cfg.seed, 0);
  StepContext ctx{&sim, observed, &counter, &streams, &out.events};

  ChainState state;
  state.theta = cfg.init;
  state.log_prior = cfg.prior.log_density(cfg.init);

  std::optional<GpsModel> model;
  if (cfg.sampler == SamplerKind::kGpSurrogate) model = initialize_gps(cfg, ctx, rng);
  if (cfg.sampler == SamplerKind::kKernelPseudoMarginal) {
    state.cached_loglik = detail::kernel_estimate(ctx, state.theta, cfg.S0, cfg.epsilon, 0);
  }
  out.init_calls = counter.total();

  out.records.reserve(static_cast<std::size_t>(cfg.chain_length));
  out.samples.reserve(static_cast<std::size_t>(cfg.chain_length - cfg.burn_in));
  for (int t = 0; t < cfg.chain_length; ++t) {
    StepRecord rec;
    switch (cfg.sampler) {
      case SamplerKind::kKernelMarginal:
        rec = kernel_abc_step(state, cfg, KernelMode::kMarginal, ctx, rng);
        break;
      case SamplerKind::kKernelPseudoMarginal:
        rec = kernel_abc_step(state, cfg, KernelMode::kPseudoMarginal, ctx, rng);
        break;
      case SamplerKind::kAdaptiveSyntheticLikelihood:
        rec = asl_abc_step(state, cfg, ctx, rng);
        break;
      case SamplerKind::kGpSurrogate:
        rec = gps_abc_step(state, cfg, *model, ctx, rng);
        break;
    }
    counter.record_step(rec.sim_calls);
    out.records.push_back(std::move(rec));
    if (t >= cfg.burn_in) out.samples.push_back(state.theta);
  }
  out.total_calls = counter.total();
  if (model) out.surrogate = std::move(model->surrogate);
  return out;
}

}  // namespace gpsabc
