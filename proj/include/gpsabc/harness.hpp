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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gpsabc/diagnostics.hpp"
#include "gpsabc/errors.hpp"
#include "gpsabc/gp_surrogate.hpp"
#include "gpsabc/priors.hpp"
#include "gpsabc/samplers.hpp"
#include "gpsabc/simulators.hpp"

namespace gpsabc {

namespace fs = std::filesystem;
using Json = nlohmann::json;

inline constexpr int kManifestVersion = 1;

// ---------------------------------------------------------------------------
// Exponential-toy oracle

struct GammaParams {
  double shape = 0.0;
  double rate = 0.0;
  [[nodiscard]] double mean() const { return shape / rate; }
  [[nodiscard]] double std() const { return std::sqrt(shape) / rate; }
};

/// Conjugate posterior of an exponential rate under a Gamma(alpha, beta)
/// prior after N observations with mean y_bar.
inline GammaParams analytic_exponential_posterior(double alpha, double beta, int n, double y_bar) {
  if (!(alpha > 0.0) || !(beta > 0.0) || n < 0 || !(y_bar >= 0.0)) {
    throw InvalidArgument("analytic posterior: alpha, beta must be positive and N, y_bar non-negative");
  }
  return {alpha + n, beta + n * y_bar};
}

// ---------------------------------------------------------------------------
// Manifests

struct ObservedSource {
  enum class Kind { kInline, kFile, kGenerate };
  Kind kind = Kind::kInline;
  Vector values;
  fs::path path;
  ParamVector theta;  // simulator space
  std::uint64_t seed = 0;
};

struct ExperimentManifest {
  std::string name;
  std::string simulator;
  SimulatorOptions simulator_options;
  ObservedSource observed;
  RunConfig config;
  ParamVector init;  // simulator space, as written
  fs::path output_dir;
  bool analytic_oracle = false;
  Json source;       // the manifest as read
};

namespace detail {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("manifest field '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("manifest is missing required field '") + key + "'");
  return get_or<T>(j, key, T{});
}

inline Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline PriorComponent parse_prior_component(const Json& j, SamplingTransform transform) {
  const auto type = require<std::string>(j, "type");
  if (type == "normal") return NormalPrior{require<double>(j, "mean"), require<double>(j, "std")};
  if (type == "uniform") return UniformPrior{require<double>(j, "lower"), require<double>(j, "upper")};
  if (type == "gamma") {
    if (transform != SamplingTransform::kLog) throw ConfigError("gamma prior requires a log-sampled parameter");
    return LogGammaPrior{require<double>(j, "shape"), require<double>(j, "rate")};
  }
  throw ConfigError("unknown prior type: " + type);
}

}  // namespace detail

/// Builds a manifest from JSON. Relative paths resolve against base_dir.
/// The simulator spec is needed to size the prior, proposal and init.
inline ExperimentManifest parse_manifest(const Json& j, const fs::path& base_dir,
                                         const SimulatorRegistry& registry = SimulatorRegistry::with_builtins()) {
  using detail::get_or;
  using detail::require;
  if (!j.is_object()) throw ConfigError("manifest must be a JSON object");
  const int version = require<int>(j, "version");
  if (version != kManifestVersion) throw ConfigError("unsupported manifest version " + std::to_string(version));

  ExperimentManifest m;
  m.source = j;
  m.name = require<std::string>(j, "name");
  m.simulator = require<std::string>(j, "simulator");
  m.simulator_options = get_or<SimulatorOptions>(j, "simulator_options", {});
  const auto sim = registry.make(m.simulator, m.simulator_options);
  const SimulatorSpec& spec = sim->spec();
  const auto d = spec.param_dim;

  RunConfig& c = m.config;
  c.sampler = parse_sampler(require<std::string>(j, "sampler"));
  c.S0 = get_or<int>(j, "S0", c.S0);
  c.delta_S = get_or<int>(j, "delta_S", c.delta_S);
  c.epsilon = get_or<double>(j, "epsilon", c.epsilon);
  c.xi = get_or<double>(j, "xi", c.xi);
  c.M = get_or<int>(j, "M", c.M);
  c.chain_length = get_or<int>(j, "chain_length", c.chain_length);
  c.burn_in = get_or<int>(j, "burn_in", c.burn_in);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.diagonal_covariance = get_or<bool>(j, "diagonal_covariance", c.diagonal_covariance);
  c.grid_size = get_or<int>(j, "grid_size", c.grid_size);
  c.max_sims_per_step = get_or<std::uint64_t>(j, "max_sims_per_step", c.max_sims_per_step);
  c.max_acquisitions_per_step = get_or<int>(j, "max_acquisitions_per_step", c.max_acquisitions_per_step);

  const Json priors = j.contains("prior") ? j.at("prior") : Json();
  if (!priors.is_array() || priors.size() != d) throw ConfigError("prior must list one component per parameter");
  std::vector<PriorComponent> components;
  for (std::size_t k = 0; k < d; ++k) components.push_back(detail::parse_prior_component(priors[k], spec.transforms[k]));
  try {
    c.prior = Prior(std::move(components));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }

  const Json proposal = j.contains("proposal") ? j.at("proposal") : Json::object();
  const auto kind = get_or<std::string>(proposal, "kind", "gaussian");
  if (kind == "gaussian") {
    c.proposal.kind = ProposalSpec::Kind::kGaussian;
  } else if (kind == "single-coordinate") {
    c.proposal.kind = ProposalSpec::Kind::kSingleCoordinate;
  } else {
    throw ConfigError("unknown proposal kind: " + kind);
  }
  if (proposal.contains("std")) {
    c.proposal.stds = detail::to_vector(get_or<std::vector<double>>(proposal, "std", {}));
  } else if (proposal.contains("prior_std_fraction")) {
    c.proposal.stds = get_or<double>(proposal, "prior_std_fraction", 0.0) * c.prior.sampling_std();
  } else {
    throw ConfigError("proposal needs 'std' or 'prior_std_fraction'");
  }
  if (static_cast<std::size_t>(c.proposal.stds.size()) != d) throw ConfigError("proposal std must have one entry per parameter");

  m.init = detail::to_vector(require<std::vector<double>>(j, "init"));
  if (static_cast<std::size_t>(m.init.size()) != d) throw ConfigError("init must have one entry per parameter");
  try {
    c.init = spec.to_sampling_space(m.init);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }

  if (j.contains("gp")) {
    const Json& g = j.at("gp");
    GpConfig& gp = c.gp;
    for (const auto& name : get_or<std::vector<std::string>>(g, "transforms", {})) {
      try {
        gp.transforms.push_back(parse_transform(name));
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
    }
    gp.fit_steps = get_or<int>(g, "fit_steps", gp.fit_steps);
    gp.initial_fit_steps = get_or<int>(g, "initial_fit_steps", gp.initial_fit_steps);
    gp.early_insertions = get_or<int>(g, "early_insertions", gp.early_insertions);
    gp.late_interval = get_or<int>(g, "late_interval", gp.late_interval);
    gp.interval_fraction = get_or<double>(g, "interval_fraction", gp.interval_fraction);
    gp.noise_floor_fraction = get_or<double>(g, "noise_floor_fraction", gp.noise_floor_fraction);
    gp.acquire = get_or<bool>(g, "acquire", gp.acquire);
  }

  const Json obs = j.contains("observed") ? j.at("observed") : Json();
  if (!obs.is_object()) throw ConfigError("manifest needs an 'observed' object");
  if (obs.contains("values")) {
    m.observed.kind = ObservedSource::Kind::kInline;
    m.observed.values = detail::to_vector(get_or<std::vector<double>>(obs, "values", {}));
  } else if (obs.contains("file")) {
    m.observed.kind = ObservedSource::Kind::kFile;
    m.observed.path = base_dir / get_or<std::string>(obs, "file", "");
    if (!fs::exists(m.observed.path)) throw ConfigError("observed statistics file not found: " + m.observed.path.string());
  } else if (obs.contains("generate")) {
    const Json& g = obs.at("generate");
    m.observed.kind = ObservedSource::Kind::kGenerate;
    m.observed.theta = detail::to_vector(require<std::vector<double>>(g, "theta"));
    m.observed.seed = require<std::uint64_t>(g, "seed");
    if (static_cast<std::size_t>(m.observed.theta.size()) != d) throw ConfigError("generate.theta must have one entry per parameter");
  } else {
    throw ConfigError("observed needs one of 'values', 'file' or 'generate'");
  }

  m.output_dir = get_or<std::string>(j, "output_dir", "out/" + m.name);
  m.analytic_oracle = get_or<bool>(j, "analytic_oracle", false);
  return m;
}

inline ExperimentManifest load_manifest(const fs::path& path,
                                        const SimulatorRegistry& registry = SimulatorRegistry::with_builtins()) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest: " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ConfigError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_manifest(j, path.parent_path(), registry);
}

/// Simulates once at theta (simulator space) on stream (seed, 0).
inline Vector generate_observed(const Simulator& sim, const ParamVector& theta, std::uint64_t seed) {
  RngStream rng(seed, 0);
  return simulate(sim, sim.spec().to_sampling_space(theta), rng);
}

inline Vector resolve_observed(const ExperimentManifest& m, const Simulator& sim) {
  switch (m.observed.kind) {
    case ObservedSource::Kind::kInline:
      return m.observed.values;
    case ObservedSource::Kind::kFile:
      return read_observed_csv(m.observed.path.string()).values;
    case ObservedSource::Kind::kGenerate:
      return generate_observed(sim, m.observed.theta, m.observed.seed);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Posterior predictive

struct PredictiveResult {
  std::vector<StatVector> stats;
  std::size_t failures = 0;
};

/// draws_per_sample simulations at every thin-th sample (sampling space),
/// each on its own substream. Failed simulations are skipped and counted.
inline PredictiveResult posterior_predictive(const std::vector<ParamVector>& samples, const Simulator& sim,
                                             int draws_per_sample, int thin, StreamFactory& streams) {
  if (samples.empty()) throw InvalidArgument("posterior_predictive: no samples");
  if (draws_per_sample < 1 || thin < 1) throw InvalidArgument("posterior_predictive: draws and thin must be >= 1");
  PredictiveResult out;
  for (std::size_t i = 0; i < samples.size(); i += static_cast<std::size_t>(thin)) {
    for (int k = 0; k < draws_per_sample; ++k) {
      RngStream rng = streams.next();
      try {
        out.stats.push_back(simulate(sim, samples[i], rng));
      } catch (const SimulationFailure&) {
        ++out.failures;
      } catch (const SimulatorDomainError&) {
        ++out.failures;
      }
    }
  }
  return out;
}

/// Raw population series for every thin-th sample.
inline std::vector<std::vector<double>> blowfly_predictive_series(const std::vector<ParamVector>& samples,
                                                                  const Blowfly& sim, int thin,
                                                                  StreamFactory& streams) {
  if (thin < 1) throw InvalidArgument("thin must be >= 1");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < samples.size(); i += static_cast<std::size_t>(thin)) {
    RngStream rng = streams.next();
    out.push_back(sim.series(sim.spec().to_simulator_space(samples[i]), rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chain files
//
// chain.csv   step,accepted,tau,error,sim_calls,<param names>   retained samples, simulator space
// trace.csv   step,accepted,tau,error,sim_calls,rounds,budget_breach   every step
// events.csv  step,kind,message

struct ChainTable {
  std::vector<std::string> param_names;
  std::vector<std::uint64_t> steps;
  std::vector<std::vector<double>> columns;  // one per parameter

  [[nodiscard]] std::size_t rows() const { return steps.size(); }
};

inline void write_chain_csv(const fs::path& path, const ChainOutput& out, const RunConfig& cfg, const SimulatorSpec& spec) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot open for writing: " + path.string());
  f << "step,accepted,tau,error,sim_calls";
  for (const auto& n : spec.param_names) f << ',' << n;
  f << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const StepRecord& r = out.records[static_cast<std::size_t>(cfg.burn_in) + i];
    f << r.step << ',' << (r.accepted ? 1 : 0) << ',' << r.tau << ',' << r.error << ',' << r.sim_calls;
    const ParamVector theta = spec.to_simulator_space(out.samples[i]);
    for (Eigen::Index d = 0; d < theta.size(); ++d) f << ',' << theta[d];
    f << '\n';
  }
}

inline void write_trace_csv(const fs::path& path, const ChainOutput& out) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot open for writing: " + path.string());
  f << "step,accepted,tau,error,sim_calls,rounds,budget_breach\n" << std::setprecision(17);
  for (const auto& r : out.records) {
    f << r.step << ',' << (r.accepted ? 1 : 0) << ',' << r.tau << ',' << r.error << ',' << r.sim_calls << ',' << r.rounds
      << ',' << (r.budget_breach ? 1 : 0) << '\n';
  }
}

inline void write_events_csv(const fs::path& path, const ChainOutput& out) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot open for writing: " + path.string());
  f << "step,kind,message\n";
  for (const auto& e : out.events) {
    std::string msg = e.message;
    for (char& ch : msg) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    f << e.step << ',' << e.kind << ',' << msg << '\n';
  }
}

inline ChainTable read_chain_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open chain file: " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw ParseError("missing header", 1);
  const auto header = split_csv_line(line);
  static const std::vector<std::string> kFixed{"step", "accepted", "tau", "error", "sim_calls"};
  if (header.size() <= kFixed.size() || !std::equal(kFixed.begin(), kFixed.end(), header.begin())) {
    throw ParseError("header must start with step,accepted,tau,error,sim_calls and name at least one parameter", 1);
  }
  ChainTable t;
  t.param_names.assign(header.begin() + static_cast<std::ptrdiff_t>(kFixed.size()), header.end());
  t.columns.resize(t.param_names.size());
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()), line_no);
    }
    const double step = parse_double(cells[0], line_no);
    if (!(step >= 0.0) || step != std::floor(step)) throw ParseError("step must be a non-negative integer", line_no);
    t.steps.push_back(static_cast<std::uint64_t>(step));
    for (std::size_t k = 1; k < kFixed.size(); ++k) parse_double(cells[k], line_no);
    for (std::size_t d = 0; d < t.param_names.size(); ++d) t.columns[d].push_back(parse_double(cells[kFixed.size() + d], line_no));
  }
  if (t.rows() == 0) throw ParseError("chain file has no samples", line_no);
  return t;
}

// ---------------------------------------------------------------------------
// Running an experiment

struct RunArtifacts {
  fs::path directory;
  ChainOutput output;
  Vector observed;
  double wall_seconds = 0.0;
};

inline Json run_metadata(const ExperimentManifest& m, const RunConfig& cfg, const SimulatorSpec& spec, const RunArtifacts& a) {
  std::size_t breaches = 0;
  for (const auto& r : a.output.records) breaches += r.budget_breach ? 1 : 0;
  Json resolved = m.source;
  resolved["seed"] = cfg.seed;
  resolved["output_dir"] = a.directory.string();
  Json meta;
  meta["name"] = m.name;
  meta["sampler"] = sampler_name(cfg.sampler);
  meta["seed"] = cfg.seed;
  meta["param_names"] = spec.param_names;
  meta["stat_names"] = spec.stat_names;
  meta["observed"] = detail::to_std(a.observed);
  meta["total_calls"] = a.output.total_calls;
  meta["init_calls"] = a.output.init_calls;
  meta["chain_calls"] = a.output.total_calls - a.output.init_calls;
  meta["acceptance_rate"] = a.output.acceptance_rate();
  meta["budget_breaches"] = breaches;
  meta["events"] = a.output.events.size();
  meta["retained_samples"] = a.output.samples.size();
  meta["wall_time_seconds"] = a.wall_seconds;
  meta["config"] = resolved;
  return meta;
}

/// Oracle comparison for exponential-toy manifests with a gamma prior.
inline std::optional<Json> exponential_oracle_report(const ExperimentManifest& m, const RunArtifacts& a) {
  if (!m.analytic_oracle || m.simulator != "exp-toy") return std::nullopt;
  const auto* g = std::get_if<LogGammaPrior>(&m.config.prior.components().at(0));
  if (!g) return std::nullopt;
  const int n = static_cast<int>(detail::option_or(m.simulator_options, "N", 500));
  const GammaParams post = analytic_exponential_posterior(g->shape, g->rate, n, a.observed[0]);
  std::vector<double> theta;
  for (const auto& s : a.output.samples) theta.push_back(std::exp(s[0]));
  const double mean = sample_mean(theta);
  const double sd = sample_std(theta);
  Json j;
  j["posterior_shape"] = post.shape;
  j["posterior_rate"] = post.rate;
  j["analytic_mean"] = post.mean();
  j["analytic_std"] = post.std();
  j["chain_mean"] = mean;
  j["chain_std"] = sd;
  j["mean_relative_error"] = std::abs(mean - post.mean()) / post.mean();
  j["std_relative_error"] = std::abs(sd - post.std()) / post.std();
  return j;
}

/// Runs one manifest and writes chain, trace, events, metadata (plus
/// surrogate and oracle files where they apply) under out_dir.
inline RunArtifacts run_experiment(const ExperimentManifest& m, std::optional<std::uint64_t> seed_override = std::nullopt,
                                   std::optional<fs::path> out_dir = std::nullopt,
                                   const SimulatorRegistry& registry = SimulatorRegistry::with_builtins()) {
  const auto sim = registry.make(m.simulator, m.simulator_options);
  RunConfig cfg = m.config;
  if (seed_override) cfg.seed = *seed_override;
  RunArtifacts a;
  a.directory = out_dir ? *out_dir : m.output_dir;
  a.observed = resolve_observed(m, *sim);
  cfg.validate(sim->spec(), a.observed);
  fs::create_directories(a.directory);

  const auto t0 = std::chrono::steady_clock::now();
  a.output = run_chain(cfg, *sim, a.observed);
  a.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_chain_csv(a.directory / "chain.csv", a.output, cfg, sim->spec());
  write_trace_csv(a.directory / "trace.csv", a.output);
  write_events_csv(a.directory / "events.csv", a.output);
  if (a.output.surrogate) save_surrogate(*a.output.surrogate, (a.directory / "surrogate.txt").string());
  {
    std::ofstream f(a.directory / "metadata.json");
    f << run_metadata(m, cfg, sim->spec(), a).dump(2) << '\n';
  }
  if (auto oracle = exponential_oracle_report(m, a)) {
    std::ofstream f(a.directory / "oracle.json");
    f << oracle->dump(2) << '\n';
  }
  return a;
}

// ---------------------------------------------------------------------------
// Summaries and comparisons

struct PosteriorSummary {
  std::vector<std::string> names;
  std::vector<MarginalSummary> marginals;
  std::size_t samples = 0;
  std::optional<std::uint64_t> total_calls;
};

inline PosteriorSummary summarize_table(const ChainTable& t) {
  PosteriorSummary s;
  s.names = t.param_names;
  s.samples = t.rows();
  for (const auto& col : t.columns) s.marginals.push_back(summarize_marginal(col));
  return s;
}

inline Json summary_json(const PosteriorSummary& s) {
  Json j;
  j["samples"] = s.samples;
  if (s.total_calls) j["total_calls"] = *s.total_calls;
  Json params = Json::array();
  for (std::size_t d = 0; d < s.names.size(); ++d) {
    const auto& m = s.marginals[d];
    params.push_back({{"name", s.names[d]}, {"mean", m.mean}, {"std", m.std}, {"q05", m.quantiles[0]},
                      {"q25", m.quantiles[1]}, {"q50", m.quantiles[2]}, {"q75", m.quantiles[3]},
                      {"q95", m.quantiles[4]}, {"ess", m.ess}});
  }
  j["parameters"] = params;
  return j;
}

/// Reads a chain file (and metadata.json beside it, when present), writes
/// summary.json, one histogram per parameter and one scatter subsample per
/// parameter pair into out_dir.
inline PosteriorSummary summarize(const fs::path& chain_path, const fs::path& out_dir, int bins = 30,
                                  std::size_t scatter_points = 1000) {
  const ChainTable t = read_chain_csv(chain_path);
  PosteriorSummary s = summarize_table(t);
  const fs::path meta_path = chain_path.parent_path() / "metadata.json";
  if (fs::exists(meta_path)) {
    std::ifstream f(meta_path);
    try {
      const Json meta = Json::parse(f);
      if (meta.contains("total_calls")) s.total_calls = meta.at("total_calls").get<std::uint64_t>();
    } catch (const Json::exception& e) {
      throw ConfigError("unreadable metadata " + meta_path.string() + ": " + e.what());
    }
  }
  fs::create_directories(out_dir);
  {
    std::ofstream f(out_dir / "summary.json");
    f << summary_json(s).dump(2) << '\n';
  }
  for (std::size_t d = 0; d < t.param_names.size(); ++d) {
    const Histogram h = histogram(t.columns[d], bins);
    std::ofstream f(out_dir / ("hist_" + t.param_names[d] + ".csv"));
    f << "lower,upper,count\n" << std::setprecision(17);
    for (std::size_t k = 0; k < h.counts.size(); ++k) f << h.edges[k] << ',' << h.edges[k + 1] << ',' << h.counts[k] << '\n';
  }
  const std::size_t stride = std::max<std::size_t>(1, t.rows() / std::max<std::size_t>(scatter_points, 1));
  for (std::size_t a = 0; a < t.param_names.size(); ++a) {
    for (std::size_t b = a + 1; b < t.param_names.size(); ++b) {
      std::ofstream f(out_dir / ("scatter_" + t.param_names[a] + "_" + t.param_names[b] + ".csv"));
      f << t.param_names[a] << ',' << t.param_names[b] << '\n' << std::setprecision(17);
      for (std::size_t i = 0; i < t.rows(); i += stride) f << t.columns[a][i] << ',' << t.columns[b][i] << '\n';
    }
  }
  return s;
}

struct ComparisonRow {
  std::string name;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double std_a = 0.0;
  double std_b = 0.0;
  KsResult ks;
};

/// Per-parameter mean/std deltas and two-sample KS between two chains.
inline std::vector<ComparisonRow> compare_chains(const ChainTable& a, const ChainTable& b) {
  if (a.param_names != b.param_names) throw InvalidArgument("compare: chains have different parameters");
  std::vector<ComparisonRow> rows;
  for (std::size_t d = 0; d < a.param_names.size(); ++d) {
    ComparisonRow r;
    r.name = a.param_names[d];
    r.mean_a = sample_mean(a.columns[d]);
    r.mean_b = sample_mean(b.columns[d]);
    r.std_a = sample_std(a.columns[d]);
    r.std_b = sample_std(b.columns[d]);
    r.ks = ks_two_sample(a.columns[d], b.columns[d]);
    rows.push_back(r);
  }
  return rows;
}

inline Json comparison_json(const std::vector<ComparisonRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"name", r.name}, {"mean_a", r.mean_a}, {"mean_b", r.mean_b}, {"mean_delta", r.mean_b - r.mean_a},
                   {"std_a", r.std_a}, {"std_b", r.std_b}, {"std_delta", r.std_b - r.std_a},
                   {"ks_statistic", r.ks.statistic}, {"ks_p_value", r.ks.p_value}});
  }
  return out;
}

}  // namespace gpsabc
