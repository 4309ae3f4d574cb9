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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "gpsabc/errors.hpp"
#include "gpsabc/mvn.hpp"
#include "gpsabc/rng.hpp"

namespace gpsabc {

using StatVector = Vector;
using ParamVector = Vector;

enum class SamplingTransform { kIdentity, kLog };

/// Shape of a simulator: parameter and statistic dimensions plus the map
/// from sampler space to simulator space.
struct SimulatorSpec {
  std::size_t param_dim = 0;
  std::size_t stat_dim = 0;
  std::vector<std::string> param_names;
  std::vector<std::string> stat_names;
  std::vector<SamplingTransform> transforms;

  [[nodiscard]] ParamVector to_simulator_space(const ParamVector& s) const {
    ParamVector theta = s;
    for (std::size_t d = 0; d < param_dim; ++d) {
      if (transforms[d] == SamplingTransform::kLog) theta[static_cast<Eigen::Index>(d)] = std::exp(s[static_cast<Eigen::Index>(d)]);
    }
    return theta;
  }

  [[nodiscard]] ParamVector to_sampling_space(const ParamVector& theta) const {
    ParamVector s = theta;
    for (std::size_t d = 0; d < param_dim; ++d) {
      if (transforms[d] == SamplingTransform::kLog) {
        const double v = theta[static_cast<Eigen::Index>(d)];
        if (!(v > 0.0)) throw InvalidArgument("log-transformed parameter must be positive: " + param_names[d]);
        s[static_cast<Eigen::Index>(d)] = std::log(v);
      }
    }
    return s;
  }
};

/// A stochastic simulator theta -> x. Implementations must be pure given the stream.
class Simulator {
 public:
  virtual ~Simulator() = default;
  [[nodiscard]] virtual const SimulatorSpec& spec() const noexcept = 0;
  /// theta is in simulator space. Throws SimulatorDomainError or SimulationFailure.
  [[nodiscard]] virtual StatVector simulate_native(const ParamVector& theta, RngStream& rng) const = 0;
};

/// Runs a simulator on a sampler-space point: applies the transform and checks
/// shapes and finiteness on both sides.
inline StatVector simulate(const Simulator& sim, const ParamVector& s, RngStream& rng) {
  const auto& spec = sim.spec();
  if (static_cast<std::size_t>(s.size()) != spec.param_dim) throw InvalidArgument("simulate: parameter dimension mismatch");
  if (!s.allFinite()) throw SimulatorDomainError("simulate: non-finite parameter");
  const ParamVector theta = spec.to_simulator_space(s);
  if (!theta.allFinite()) throw SimulatorDomainError("simulate: parameter overflows after transform");
  StatVector x = sim.simulate_native(theta, rng);
  if (static_cast<std::size_t>(x.size()) != spec.stat_dim) throw InvalidArgument("simulate: statistic dimension mismatch");
  if (!x.allFinite()) throw SimulationFailure("simulate: non-finite statistics");
  return x;
}

/// Simulation call accounting. total is safe to bump from batch workers;
/// the per-step list is appended by the single chain owner.
class CallCounter {
 public:
  void increment() noexcept { total_.fetch_add(1, std::memory_order_relaxed); }
  [[nodiscard]] std::uint64_t total() const noexcept { return total_.load(std::memory_order_relaxed); }

  void record_step(std::uint64_t calls) { per_step_.push_back(calls); }
  [[nodiscard]] const std::vector<std::uint64_t>& per_step() const noexcept { return per_step_; }

 private:
  std::atomic<std::uint64_t> total_{0};
  std::vector<std::uint64_t> per_step_;
};

/// Simulator bound to a counter; every invocation counts, including failed ones.
class CountedSimulator {
 public:
  CountedSimulator(const Simulator& sim, CallCounter& counter) : sim_(&sim), counter_(&counter) {}

  StatVector operator()(const ParamVector& s, RngStream& rng) const {
    counter_->increment();
    return simulate(*sim_, s, rng);
  }

  [[nodiscard]] const SimulatorSpec& spec() const noexcept { return sim_->spec(); }
  [[nodiscard]] const Simulator& simulator() const noexcept { return *sim_; }
  [[nodiscard]] CallCounter& counter() const noexcept { return *counter_; }

 private:
  const Simulator* sim_;
  CallCounter* counter_;
};

// ---------------------------------------------------------------------------
// Exponential toy

/// Mean of n exponential(rate) draws.
inline double exponential_mean(RngStream& rng, double rate, int n) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += exponential_draw(rng, rate);
  return sum / n;
}

/// Observed statistic for the exponential toy: mean of n draws at theta_star.
inline StatVector exponential_toy_observe(RngStream& rng, double theta_star = 0.1, int n = 500) {
  if (!(theta_star > 0.0) || n < 1) throw InvalidArgument("exponential_toy_observe: need theta_star > 0 and N >= 1");
  StatVector y(1);
  y[0] = exponential_mean(rng, theta_star, n);
  return y;
}

/// theta is the rate of an exponential; x is the mean of N draws. Sampled in log space.
class ExponentialToy final : public Simulator {
 public:
  explicit ExponentialToy(int n = 500) : n_(n) {
    if (n < 1) throw InvalidArgument("exponential toy: N must be >= 1");
    spec_.param_dim = 1;
    spec_.stat_dim = 1;
    spec_.param_names = {"rate"};
    spec_.stat_names = {"mean"};
    spec_.transforms = {SamplingTransform::kLog};
  }

  [[nodiscard]] const SimulatorSpec& spec() const noexcept override { return spec_; }

  [[nodiscard]] StatVector simulate_native(const ParamVector& theta, RngStream& rng) const override {
    if (!(theta[0] > 0.0)) throw SimulatorDomainError("exponential toy: rate must be positive");
    StatVector x(1);
    x[0] = exponential_mean(rng, theta[0], n_);
    return x;
  }

  [[nodiscard]] int n() const noexcept { return n_; }

 private:
  int n_;
  SimulatorSpec spec_;
};

// ---------------------------------------------------------------------------
// Blowfly population dynamics

struct BlowflyParams {
  double P = 0.0;
  double delta = 0.0;
  double N0 = 0.0;
  double sigma_d = 0.0;
  double sigma_p = 0.0;
  double tau = 0.0;

  static BlowflyParams from_vector(const ParamVector& theta) {
    return {theta[0], theta[1], theta[2], theta[3], theta[4], theta[5]};
  }
};

struct BlowflyConfig {
  int T = 1000;
  int burn_in = 500;
  double initial_value = 180.0;
  double peak_threshold = 1.5;  // c: peaks count relative to c * mean
  double peak_sharpness = 10.0;  // k: logistic sharpness in units of the mean
};

/// Integer delay used by the simulator: round(tau), at least 1.
inline int blowfly_lag(double tau) { return std::max(1, static_cast<int>(std::lround(tau))); }

/// N_{t+1} = P N_{t-L} exp(-N_{t-L} / N0) e_t + N_t exp(-delta eps_t) with
/// e_t ~ G(1/sp^2, 1/sp^2), eps_t ~ G(1/sd^2, 1/sd^2). Noise sources collapse
/// to 1 when their sigma is below 1e-8. Returns the last T values.
inline std::vector<double> blowfly_series(const BlowflyParams& p, int T, int burn_in, RngStream& rng,
                                          double initial_value = 180.0) {
  if (T < 1 || burn_in < 0) throw InvalidArgument("blowfly_series: need T >= 1 and burn_in >= 0");
  if (!(p.P >= 0.0) || !(p.delta > 0.0) || !(p.N0 > 0.0) || !(p.sigma_d >= 0.0) || !(p.sigma_p >= 0.0) ||
      !(p.tau > 0.0) || !std::isfinite(p.P) || !std::isfinite(p.delta)) {
    throw SimulatorDomainError("blowfly_series: parameters out of domain");
  }
  const int lag = blowfly_lag(p.tau);
  if (lag >= T + burn_in) throw SimulatorDomainError("blowfly_series: lag must be shorter than the series");

  constexpr double kNoiseOff = 1e-8;
  const bool repro_noise = p.sigma_p >= kNoiseOff;
  const bool death_noise = p.sigma_d >= kNoiseOff;
  const double shape_p = repro_noise ? 1.0 / (p.sigma_p * p.sigma_p) : 0.0;
  const double shape_d = death_noise ? 1.0 / (p.sigma_d * p.sigma_d) : 0.0;

  const int steps = burn_in + T;
  std::vector<double> n(static_cast<std::size_t>(lag + 1 + steps), initial_value);
  for (int t = lag; t < lag + steps; ++t) {
    const double lagged = n[static_cast<std::size_t>(t - lag)];
    const double e = repro_noise ? gamma_draw(rng, shape_p, shape_p) : 1.0;
    const double eps = death_noise ? gamma_draw(rng, shape_d, shape_d) : 1.0;
    const double next = p.P * lagged * std::exp(-lagged / p.N0) * e + n[static_cast<std::size_t>(t)] * std::exp(-p.delta * eps);
    if (!std::isfinite(next)) throw SimulationFailure("blowfly_series: population overflow");
    n[static_cast<std::size_t>(t + 1)] = next;
  }
  return {n.end() - T, n.end()};
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median of empty sequence");
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

/// Smooth peak score: sum over interior local maxima (N[t-1] < N[t] >= N[t+1])
/// of 1 / (1 + exp(-k (N[t] - c mean) / mean)).
inline double smooth_peak_score(const std::vector<double>& series, double mean, double threshold, double sharpness) {
  const double scale = mean > 0.0 ? mean : 1.0;
  double score = 0.0;
  for (std::size_t t = 1; t + 1 < series.size(); ++t) {
    if (series[t - 1] < series[t] && series[t] >= series[t + 1]) {
      const double z = (series[t] - threshold * mean) / scale;
      score += 1.0 / (1.0 + std::exp(-sharpness * z));
    }
  }
  return score;
}

/// [mean, mean - median, smooth peak score, log(max + 1)]
inline StatVector blowfly_stats(const std::vector<double>& series, double threshold = 1.5, double sharpness = 10.0) {
  if (series.empty()) throw InvalidArgument("blowfly_stats: empty series");
  double sum = 0.0;
  double max = -std::numeric_limits<double>::infinity();
  for (double v : series) {
    if (!std::isfinite(v)) throw InvalidArgument("blowfly_stats: non-finite series value");
    sum += v;
    max = std::max(max, v);
  }
  const double mean = sum / static_cast<double>(series.size());
  StatVector out(4);
  out[0] = mean;
  out[1] = mean - median_of(series);
  out[2] = smooth_peak_score(series, mean, threshold, sharpness);
  out[3] = std::log(max + 1.0);
  return out;
}

/// Six parameters {P, delta, N0, sigma_d, sigma_p, tau}, all sampled in log space.
class Blowfly final : public Simulator {
 public:
  explicit Blowfly(BlowflyConfig config = {}) : config_(config) {
    spec_.param_dim = 6;
    spec_.stat_dim = 4;
    spec_.param_names = {"P", "delta", "N0", "sigma_d", "sigma_p", "tau"};
    spec_.stat_names = {"mean", "mean_minus_median", "smooth_peaks", "log_max"};
    spec_.transforms.assign(6, SamplingTransform::kLog);
  }

  [[nodiscard]] const SimulatorSpec& spec() const noexcept override { return spec_; }
  [[nodiscard]] const BlowflyConfig& config() const noexcept { return config_; }

  [[nodiscard]] std::vector<double> series(const ParamVector& theta, RngStream& rng) const {
    return blowfly_series(BlowflyParams::from_vector(theta), config_.T, config_.burn_in, rng, config_.initial_value);
  }

  [[nodiscard]] StatVector simulate_native(const ParamVector& theta, RngStream& rng) const override {
    return blowfly_stats(series(theta, rng), config_.peak_threshold, config_.peak_sharpness);
  }

 private:
  BlowflyConfig config_;
  SimulatorSpec spec_;
};

// ---------------------------------------------------------------------------
// Registry

using SimulatorOptions = std::map<std::string, double>;
using SimulatorFactory = std::function<std::unique_ptr<Simulator>(const SimulatorOptions&)>;

namespace detail {
inline double option_or(const SimulatorOptions& o, const std::string& key, double fallback) {
  const auto it = o.find(key);
  return it == o.end() ? fallback : it->second;
}
}  // namespace detail

class SimulatorRegistry {
 public:
  /// Registry preloaded with "exp-toy" and "blowfly".
  static SimulatorRegistry with_builtins() {
    SimulatorRegistry r;
    r.add("exp-toy", [](const SimulatorOptions& o) {
      return std::make_unique<ExponentialToy>(static_cast<int>(detail::option_or(o, "N", 500)));
    });
    r.add("blowfly", [](const SimulatorOptions& o) {
      BlowflyConfig c;
      c.T = static_cast<int>(detail::option_or(o, "T", c.T));
      c.burn_in = static_cast<int>(detail::option_or(o, "burn_in", c.burn_in));
      c.initial_value = detail::option_or(o, "initial_value", c.initial_value);
      c.peak_threshold = detail::option_or(o, "peak_threshold", c.peak_threshold);
      c.peak_sharpness = detail::option_or(o, "peak_sharpness", c.peak_sharpness);
      return std::make_unique<Blowfly>(c);
    });
    return r;
  }

  void add(const std::string& name, SimulatorFactory factory) { factories_[name] = std::move(factory); }

  [[nodiscard]] bool contains(const std::string& name) const { return factories_.count(name) != 0; }

  [[nodiscard]] std::unique_ptr<Simulator> make(const std::string& name, const SimulatorOptions& options = {}) const {
    const auto it = factories_.find(name);
    if (it == factories_.end()) throw ConfigError("unknown simulator: " + name);
    return it->second(options);
  }

  [[nodiscard]] std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : factories_) out.push_back(k);
    return out;
  }

 private:
  std::map<std::string, SimulatorFactory> factories_;
};

// ---------------------------------------------------------------------------
// Observed statistics files: header of statistic names, one row of values.

struct ObservedStats {
  std::vector<std::string> names;
  StatVector values;
};

inline void write_observed_csv(const std::string& path, const ObservedStats& obs) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open for writing: " + path);
  for (std::size_t i = 0; i < obs.names.size(); ++i) out << (i ? "," : "") << obs.names[i];
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < obs.values.size(); ++i) out << (i ? "," : "") << obs.values[i];
  out << '\n';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_double(const std::string& cell, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw ParseError("trailing characters in number '" + cell + "'", line);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("not a number: '" + cell + "'", line);
  }
}

inline ObservedStats read_observed_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open observed statistics: " + path);
  std::string header;
  std::string row;
  if (!std::getline(in, header)) throw ParseError("missing header", 1);
  if (!std::getline(in, row)) throw ParseError("missing value row", 2);
  ObservedStats obs;
  obs.names = split_csv_line(header);
  const auto cells = split_csv_line(row);
  if (cells.size() != obs.names.size()) throw ParseError("value count does not match header", 2);
  obs.values.resize(static_cast<Eigen::Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) obs.values[static_cast<Eigen::Index>(i)] = parse_double(cells[i], 2);
  return obs;
}

}  // namespace gpsabc
