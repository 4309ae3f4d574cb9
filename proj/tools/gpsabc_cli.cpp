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

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "gpsabc/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;

using gpsabc::Json;
namespace fs = std::filesystem;

/// Maps library exceptions onto the documented exit codes.
template <typename F>
int guarded(F&& body) {
  try {
    body();
    return kExitOk;
  } catch (const gpsabc::NumericalDegeneracy& e) {
    std::cerr << "numerical degeneracy: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const gpsabc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const gpsabc::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kExitConfig;
}

struct RunOptions {
  std::vector<std::string> manifests;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 1;
};

/// Runs each manifest on its own chain; with several manifests the chains
/// share a worker pool but nothing else.
int cmd_run(const RunOptions& opt) {
  std::vector<gpsabc::ExperimentManifest> manifests;
  const int parsed = guarded([&] {
    for (const auto& path : opt.manifests) manifests.push_back(gpsabc::load_manifest(path));
  });
  if (parsed != kExitOk) return parsed;

  std::vector<int> codes(manifests.size(), kExitOk);
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i = next++; i < manifests.size(); i = next++) {
      const auto& m = manifests[i];
      std::optional<fs::path> dir;
      if (!opt.out.empty()) dir = manifests.size() == 1 ? fs::path(opt.out) : fs::path(opt.out) / m.name;
      codes[i] = guarded([&] {
        const auto a = gpsabc::run_experiment(m, opt.seed, dir);
        std::lock_guard<std::mutex> lock(io);
        std::cout << m.name << ": " << a.output.samples.size() << " samples, " << a.output.total_calls
                  << " simulation calls, acceptance " << a.output.acceptance_rate() << ", " << a.wall_seconds
                  << " s -> " << a.directory.string() << '\n';
      });
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(manifests.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (int c : codes) {
    if (c != kExitOk) return c;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gpsabc: likelihood-free ABC-MCMC with adaptive synthetic likelihoods and GP surrogates"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "execute one or more experiment manifests");
  run->add_option("--manifest", run_opt.manifests, "manifest JSON file (repeatable)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", run_opt.seed, "override the manifest seed");
  run->add_option("--out", run_opt.out, "output directory (per-manifest subdirectories when several are given)");
  run->add_option("--threads", run_opt.threads, "number of manifests to run concurrently")->check(CLI::PositiveNumber);

  std::string chain_path;
  std::string summary_out;
  int bins = 30;
  auto* summarize = app.add_subcommand("summarize", "posterior summary, histograms and scatter data for a chain");
  summarize->add_option("--chain", chain_path, "chain.csv produced by run")->required()->check(CLI::ExistingFile);
  summarize->add_option("--out", summary_out, "output directory (default: beside the chain)");
  summarize->add_option("--bins", bins, "histogram bins")->check(CLI::PositiveNumber);

  std::string pred_manifest;
  std::string pred_chain;
  std::string pred_out = "predictive.csv";
  std::string series_out;
  int draws = 1;
  int thin = 10;
  std::uint64_t pred_seed = 1;
  auto* predictive = app.add_subcommand("predictive", "posterior-predictive statistics from a chain");
  predictive->add_option("--manifest", pred_manifest, "manifest that produced the chain")->required()->check(CLI::ExistingFile);
  predictive->add_option("--chain", pred_chain, "chain.csv")->required()->check(CLI::ExistingFile);
  predictive->add_option("--draws", draws, "simulations per retained sample")->check(CLI::PositiveNumber);
  predictive->add_option("--thin", thin, "use every thin-th sample")->check(CLI::PositiveNumber);
  predictive->add_option("--seed", pred_seed, "stream seed");
  predictive->add_option("--out", pred_out, "output CSV of simulated statistics");
  predictive->add_option("--series-out", series_out, "blowfly only: CSV of predictive population series");

  double alpha = 0.1;
  double beta = 0.1;
  int n_obs = 500;
  double y_bar = 0.0;
  auto* oracle = app.add_subcommand("oracle", "conjugate posterior of the exponential toy");
  oracle->add_option("--alpha", alpha, "Gamma prior shape");
  oracle->add_option("--beta", beta, "Gamma prior rate");
  oracle->add_option("--N", n_obs, "number of observations");
  oracle->add_option("--ybar", y_bar, "observed mean")->required();

  std::string chain_a;
  std::string chain_b;
  auto* compare = app.add_subcommand("compare", "mean/std deltas and two-sample KS between two chains");
  compare->add_option("a", chain_a, "first chain.csv")->required()->check(CLI::ExistingFile);
  compare->add_option("b", chain_b, "second chain.csv")->required()->check(CLI::ExistingFile);

  std::string obs_manifest;
  std::string obs_out;
  auto* observe = app.add_subcommand("observe", "simulate and write the observed statistics a manifest generates");
  observe->add_option("--manifest", obs_manifest, "manifest with observed.generate")->required()->check(CLI::ExistingFile);
  observe->add_option("--out", obs_out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return cmd_run(run_opt);

  if (*summarize) {
    return guarded([&] {
      const fs::path chain(chain_path);
      const fs::path out = summary_out.empty() ? chain.parent_path() : fs::path(summary_out);
      const auto s = gpsabc::summarize(chain, out, bins);
      std::cout << gpsabc::summary_json(s).dump(2) << '\n';
    });
  }

  if (*predictive) {
    return guarded([&] {
      const auto m = gpsabc::load_manifest(pred_manifest);
      const auto sim = gpsabc::SimulatorRegistry::with_builtins().make(m.simulator, m.simulator_options);
      const auto table = gpsabc::read_chain_csv(pred_chain);
      std::vector<gpsabc::ParamVector> samples;
      for (std::size_t i = 0; i < table.rows(); ++i) {
        gpsabc::ParamVector theta(static_cast<Eigen::Index>(table.columns.size()));
        for (std::size_t d = 0; d < table.columns.size(); ++d) theta[static_cast<Eigen::Index>(d)] = table.columns[d][i];
        samples.push_back(sim->spec().to_sampling_space(theta));
      }
      gpsabc::StreamFactory streams(pred_seed, 1);
      const auto result = gpsabc::posterior_predictive(samples, *sim, draws, thin, streams);
      std::ofstream f(pred_out);
      if (!f) throw gpsabc::ConfigError("cannot write " + pred_out);
      for (std::size_t j = 0; j < sim->spec().stat_names.size(); ++j) f << (j ? "," : "") << sim->spec().stat_names[j];
      f << '\n' << std::setprecision(17);
      for (const auto& x : result.stats) {
        for (Eigen::Index j = 0; j < x.size(); ++j) f << (j ? "," : "") << x[j];
        f << '\n';
      }
      std::cout << result.stats.size() << " predictive draws, " << result.failures << " failed simulations\n";
      if (!series_out.empty()) {
        const auto* fly = dynamic_cast<const gpsabc::Blowfly*>(sim.get());
        if (!fly) throw gpsabc::ConfigError("--series-out needs the blowfly simulator");
        gpsabc::StreamFactory series_streams(pred_seed, 1u << 30);
        const auto series = gpsabc::blowfly_predictive_series(samples, *fly, thin, series_streams);
        std::ofstream s(series_out);
        s << std::setprecision(17);
        for (const auto& row : series) {
          for (std::size_t t = 0; t < row.size(); ++t) s << (t ? "," : "") << row[t];
          s << '\n';
        }
      }
    });
  }

  if (*oracle) {
    return guarded([&] {
      const auto post = gpsabc::analytic_exponential_posterior(alpha, beta, n_obs, y_bar);
      const Json j{{"shape", post.shape}, {"rate", post.rate}, {"mean", post.mean()}, {"std", post.std()}};
      std::cout << j.dump(2) << '\n';
    });
  }

  if (*compare) {
    return guarded([&] {
      const auto rows = gpsabc::compare_chains(gpsabc::read_chain_csv(chain_a), gpsabc::read_chain_csv(chain_b));
      std::cout << gpsabc::comparison_json(rows).dump(2) << '\n';
    });
  }

  if (*observe) {
    return guarded([&] {
      const auto m = gpsabc::load_manifest(obs_manifest);
      if (m.observed.kind != gpsabc::ObservedSource::Kind::kGenerate) {
        throw gpsabc::ConfigError("observe needs a manifest whose observed source is 'generate'");
      }
      const auto sim = gpsabc::SimulatorRegistry::with_builtins().make(m.simulator, m.simulator_options);
      const gpsabc::ObservedStats obs{sim->spec().stat_names, gpsabc::generate_observed(*sim, m.observed.theta, m.observed.seed)};
      gpsabc::write_observed_csv(obs_out, obs);
      std::cout << "wrote " << obs_out << '\n';
    });
  }
  return kExitOk;
}
