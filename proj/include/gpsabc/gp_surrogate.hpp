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
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "gpsabc/errors.hpp"
#include "gpsabc/mvn.hpp"
#include "gpsabc/rng.hpp"

namespace gpsabc {

/// Fixed monotone warp applied to a statistic before it is modelled. The
/// observation goes through the same warp, and because the Jacobian depends
/// only on the observation it cancels in every acceptance ratio.
enum class OutputTransform { kIdentity, kLog, kLog1p };

inline double warp(OutputTransform t, double x) {
  switch (t) {
    case OutputTransform::kLog:
      return x > 0.0 ? std::log(x) : std::numeric_limits<double>::quiet_NaN();
    case OutputTransform::kLog1p:
      return x > -1.0 ? std::log1p(x) : std::numeric_limits<double>::quiet_NaN();
    case OutputTransform::kIdentity:
      break;
  }
  return x;
}

inline double unwarp(OutputTransform t, double z) {
  switch (t) {
    case OutputTransform::kLog:
      return std::exp(z);
    case OutputTransform::kLog1p:
      return std::expm1(z);
    case OutputTransform::kIdentity:
      break;
  }
  return z;
}

/// ARD squared-exponential hyperparameters of one statistic's GP.
struct GpHyperparams {
  double signal_variance = 1.0;
  Vector length_scales;
  double noise_variance = 1e-2;
};

/// Joint predictive of the latent mean at (theta', theta), in that order.
struct BivariatePredictive {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
};

struct FitReport {
  std::size_t statistic = 0;
  bool aborted = false;
  int steps_taken = 0;
  double lml_before = 0.0;
  double lml_after = 0.0;
  std::string message;
};

struct SurrogateOptions {
  std::vector<OutputTransform> transforms;  // empty means identity everywhere
  double noise_floor_fraction = 1e-6;       // noise >= fraction * output variance
  RidgePolicy ridge;
};

/// J independent GPs over a shared set of N training inputs.
class SurrogateState {
 public:
  SurrogateState() = default;
  SurrogateState(std::size_t param_dim, std::size_t stat_dim, SurrogateOptions options = {})
      : d_(param_dim), j_(stat_dim), options_(std::move(options)), inputs_(0, static_cast<Eigen::Index>(param_dim)),
        raw_outputs_(0, static_cast<Eigen::Index>(stat_dim)), outputs_(0, static_cast<Eigen::Index>(stat_dim)) {
    if (options_.transforms.empty()) options_.transforms.assign(stat_dim, OutputTransform::kIdentity);
    if (options_.transforms.size() != stat_dim) throw InvalidArgument("surrogate: one output transform per statistic");
    hyper_.resize(stat_dim);
    caches_.resize(stat_dim);
    for (auto& h : hyper_) h.length_scales = Vector::Ones(static_cast<Eigen::Index>(param_dim));
    for (auto& c : caches_) {
      c.lower = Matrix(0, 0);
      c.weights = Vector(0);
    }
  }

  [[nodiscard]] std::size_t param_dim() const noexcept { return d_; }
  [[nodiscard]] std::size_t stat_dim() const noexcept { return j_; }
  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(inputs_.rows()); }
  [[nodiscard]] const Matrix& inputs() const noexcept { return inputs_; }
  [[nodiscard]] const Matrix& raw_outputs() const noexcept { return raw_outputs_; }
  /// Warped outputs actually modelled by the GPs.
  [[nodiscard]] const Matrix& outputs() const noexcept { return outputs_; }
  [[nodiscard]] const GpHyperparams& hyperparams(std::size_t j) const { return hyper_.at(j); }
  [[nodiscard]] const SurrogateOptions& options() const noexcept { return options_; }
  [[nodiscard]] OutputTransform transform(std::size_t j) const { return options_.transforms.at(j); }
  [[nodiscard]] double prior_mean(std::size_t j) const { return caches_.at(j).prior_mean; }
  [[nodiscard]] double jitter(std::size_t j) const { return caches_.at(j).jitter; }

  /// The noise term sigma_j^2 in model (warped) units.
  [[nodiscard]] double noise_variance(std::size_t j) const { return hyper_.at(j).noise_variance; }

  /// Observation mapped into model units; NaN when the warp is undefined there.
  [[nodiscard]] double model_observation(std::size_t j, double y) const { return warp(transform(j), y); }

  /// Lower bound on sigma_j^2: a fraction of the warped output variance.
  [[nodiscard]] double noise_floor(std::size_t j) const {
    const double v = output_variance(j);
    return v > 0.0 ? options_.noise_floor_fraction * v : 1e-12;
  }

  [[nodiscard]] double output_variance(std::size_t j) const {
    const auto n = inputs_.rows();
    if (n < 2) return 0.0;
    const auto col = outputs_.col(static_cast<Eigen::Index>(j));
    const double mean = col.mean();
    return (col.array() - mean).square().sum() / static_cast<double>(n - 1);
  }

  /// True when x can be modelled (finite after warping).
  [[nodiscard]] bool accepts(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != j_) return false;
    for (std::size_t j = 0; j < j_; ++j) {
      if (!std::isfinite(warp(transform(j), x[static_cast<Eigen::Index>(j)]))) return false;
    }
    return true;
  }

  /// Append one simulation to all J GPs; caches are extended by a rank-one
  /// Cholesky update, falling back to a cold rebuild when the pivot collapses.
  void insert(const Vector& theta, const Vector& x) {
    if (static_cast<std::size_t>(theta.size()) != d_ || static_cast<std::size_t>(x.size()) != j_) {
      throw InvalidArgument("insert_training_point: dimension mismatch");
    }
    if (!theta.allFinite() || !x.allFinite()) throw InvalidArgument("insert_training_point: non-finite input");
    Vector z(x.size());
    for (std::size_t j = 0; j < j_; ++j) z[static_cast<Eigen::Index>(j)] = warp(transform(j), x[static_cast<Eigen::Index>(j)]);
    if (!z.allFinite()) throw InvalidArgument("insert_training_point: statistic outside the output transform's domain");

    const auto n = inputs_.rows();
    inputs_.conservativeResize(n + 1, Eigen::NoChange);
    inputs_.row(n) = theta.transpose();
    raw_outputs_.conservativeResize(n + 1, Eigen::NoChange);
    raw_outputs_.row(n) = x.transpose();
    outputs_.conservativeResize(n + 1, Eigen::NoChange);
    outputs_.row(n) = z.transpose();

    for (std::size_t j = 0; j < j_; ++j) {
      auto& c = caches_[j];
      const auto& h = hyper_[j];
      bool extended = false;
      if (c.valid && c.jitter == 0.0) {
        const Vector k = cross_kernel(h, inputs_.topRows(n), theta);
        const double kss = h.signal_variance + h.noise_variance;
        Vector l = k;
        if (n > 0) c.lower.topLeftCorner(n, n).triangularView<Eigen::Lower>().solveInPlace(l);
        const double pivot = kss - l.squaredNorm();
        if (pivot > 1e-12 * kss) {
          c.lower.conservativeResize(n + 1, n + 1);
          c.lower.row(n).head(n) = l.transpose();
          c.lower.col(n).head(n).setZero();
          c.lower(n, n) = std::sqrt(pivot);
          extended = true;
        }
      }
      if (extended) {
        refresh_weights(j);
      } else {
        rebuild(j);
      }
    }
  }

  /// Replace one statistic's hyperparameters and rebuild its cache.
  void set_hyperparams(std::size_t j, GpHyperparams h) {
    if (static_cast<std::size_t>(h.length_scales.size()) != d_) throw InvalidArgument("hyperparams: length-scale dimension");
    if (!(h.signal_variance > 0.0) || !(h.length_scales.array() > 0.0).all() || !(h.noise_variance >= 0.0)) {
      throw InvalidArgument("hyperparams: must be positive");
    }
    hyper_.at(j) = std::move(h);
    rebuild(j);
  }

  /// Data-driven starting point: signal variance from the output spread,
  /// length-scales from the input spread, noise at 1% of the output variance.
  void initialize_hyperparams() {
    for (std::size_t j = 0; j < j_; ++j) {
      GpHyperparams h;
      const double v = output_variance(j);
      h.signal_variance = v > 0.0 ? v : 1.0;
      h.length_scales = Vector::Ones(static_cast<Eigen::Index>(d_));
      if (inputs_.rows() >= 2) {
        for (std::size_t d = 0; d < d_; ++d) {
          const auto col = inputs_.col(static_cast<Eigen::Index>(d));
          const double mean = col.mean();
          const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(inputs_.rows() - 1));
          if (sd > 0.0) h.length_scales[static_cast<Eigen::Index>(d)] = sd;
        }
      }
      h.noise_variance = std::max(0.01 * h.signal_variance, noise_floor(j));
      hyper_[j] = h;
      rebuild(j);
    }
  }

  /// Drop every cache and refactorize from the stored data.
  void rebuild() {
    for (std::size_t j = 0; j < j_; ++j) rebuild(j);
  }

  [[nodiscard]] double kernel(std::size_t j, const Vector& a, const Vector& b) const {
    const auto& h = hyper_.at(j);
    return h.signal_variance * std::exp(-0.5 * ((a - b).array() / h.length_scales.array()).square().sum());
  }

  [[nodiscard]] BivariatePredictive predict(std::size_t j, const Vector& theta, const Vector& theta_prime) const {
    if (j >= j_) throw InvalidArgument("predict: statistic index out of range");
    const auto& h = hyper_[j];
    const auto& c = caches_[j];
    const auto n = inputs_.rows();
    BivariatePredictive out;
    out.covariance(0, 0) = h.signal_variance;
    out.covariance(1, 1) = h.signal_variance;
    out.covariance(0, 1) = out.covariance(1, 0) = kernel(j, theta_prime, theta);
    out.mean.setConstant(c.prior_mean);
    if (n == 0) return out;

    Eigen::Matrix<double, Eigen::Dynamic, 2> ks(n, 2);
    ks.col(0) = cross_kernel(h, inputs_, theta_prime);
    ks.col(1) = cross_kernel(h, inputs_, theta);
    out.mean += ks.transpose() * c.weights;
    c.lower.triangularView<Eigen::Lower>().solveInPlace(ks);
    out.covariance -= ks.transpose() * ks;
    out.covariance(0, 1) = out.covariance(1, 0) = 0.5 * (out.covariance(0, 1) + out.covariance(1, 0));
    out.covariance(0, 0) = std::max(out.covariance(0, 0), 0.0);
    out.covariance(1, 1) = std::max(out.covariance(1, 1), 0.0);
    return out;
  }

  /// Latent predictive variance of statistic j at theta.
  [[nodiscard]] double marginal_variance(std::size_t j, const Vector& theta) const {
    const auto& h = hyper_.at(j);
    const auto& c = caches_.at(j);
    if (inputs_.rows() == 0) return h.signal_variance;
    Vector k = cross_kernel(h, inputs_, theta);
    c.lower.triangularView<Eigen::Lower>().solveInPlace(k);
    return std::max(h.signal_variance - k.squaredNorm(), 0.0);
  }

  [[nodiscard]] double marginal_mean(std::size_t j, const Vector& theta) const {
    const auto& c = caches_.at(j);
    if (inputs_.rows() == 0) return c.prior_mean;
    return c.prior_mean + cross_kernel(hyper_.at(j), inputs_, theta).dot(c.weights);
  }

  // -- hyperparameter learning ---------------------------------------------

  /// Packed log-hyperparameters [log sv, log l_1..l_D, log noise].
  [[nodiscard]] Vector packed_log_hyperparams(std::size_t j) const {
    const auto& h = hyper_.at(j);
    Vector p(static_cast<Eigen::Index>(d_ + 2));
    p[0] = std::log(h.signal_variance);
    p.segment(1, static_cast<Eigen::Index>(d_)) = h.length_scales.array().log();
    p[static_cast<Eigen::Index>(d_ + 1)] = std::log(h.noise_variance);
    return p;
  }

  [[nodiscard]] GpHyperparams unpack(const Vector& p) const {
    GpHyperparams h;
    h.signal_variance = std::exp(p[0]);
    h.length_scales = p.segment(1, static_cast<Eigen::Index>(d_)).array().exp();
    h.noise_variance = std::exp(p[static_cast<Eigen::Index>(d_ + 1)]);
    return h;
  }

  /// Log marginal likelihood of statistic j's centred outputs under packed
  /// log-hyperparameters p; optionally its gradient. -inf when K is not PD.
  double log_marginal_likelihood(std::size_t j, const Vector& p, Vector* gradient = nullptr) const {
    const GpHyperparams h = unpack(p);
    const auto n = inputs_.rows();
    if (n == 0) {
      if (gradient) *gradient = Vector::Zero(p.size());
      return 0.0;
    }
    const Matrix kf = gram(h, inputs_);
    Matrix k = kf;
    k.diagonal().array() += h.noise_variance;
    Eigen::LLT<Matrix> llt(k);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Vector col = outputs_.col(static_cast<Eigen::Index>(j));
    const Vector r = col.array() - col.mean();
    const Vector a = llt.solve(r);
    const Matrix l = llt.matrixL();
    const double lml = -0.5 * r.dot(a) - l.diagonal().array().log().sum() - 0.5 * static_cast<double>(n) * kLog2Pi;
    if (gradient) {
      // dL/dp = 0.5 tr((a a^T - K^-1) dK/dp)
      Matrix linv = Matrix::Identity(n, n);
      l.triangularView<Eigen::Lower>().solveInPlace(linv);
      Matrix w = a * a.transpose();
      w.selfadjointView<Eigen::Lower>().rankUpdate(linv.transpose(), -1.0);
      w = w.selfadjointView<Eigen::Lower>();
      gradient->resize(p.size());
      (*gradient)[0] = 0.5 * (w.array() * kf.array()).sum();
      for (std::size_t d = 0; d < d_; ++d) {
        const auto col_d = inputs_.col(static_cast<Eigen::Index>(d));
        const double ls = h.length_scales[static_cast<Eigen::Index>(d)];
        double acc = 0.0;
        for (Eigen::Index c = 0; c < n; ++c) {
          for (Eigen::Index r2 = 0; r2 < n; ++r2) {
            const double diff = (col_d[r2] - col_d[c]) / ls;
            acc += w(r2, c) * kf(r2, c) * diff * diff;
          }
        }
        (*gradient)[static_cast<Eigen::Index>(d + 1)] = 0.5 * acc;
      }
      (*gradient)[static_cast<Eigen::Index>(d_ + 1)] = 0.5 * h.noise_variance * w.trace();
    }
    return lml;
  }

  /// Normalized-gradient ascent with backtracking on statistic j. Steps
  /// that would lower the marginal likelihood are never taken, and the noise
  /// stays above its floor.
  FitReport fit(std::size_t j, int steps) {
    FitReport report;
    report.statistic = j;
    if (steps <= 0) return report;
    if (inputs_.rows() < 2) {
      report.aborted = true;
      report.message = "fit skipped: fewer than 2 training points";
      return report;
    }
    Vector p = packed_log_hyperparams(j);
    const Vector lower = lower_bounds(j);
    const Vector upper = upper_bounds(j);
    p = p.cwiseMax(lower).cwiseMin(upper);
    Vector grad;
    double lml = log_marginal_likelihood(j, p, &grad);
    report.lml_before = lml;
    if (!std::isfinite(lml)) {
      report.aborted = true;
      report.lml_after = report.lml_before;
      report.message = "fit aborted: kernel matrix not positive definite, keeping previous hyperparameters";
      return report;
    }
    double step = caches_[j].fit_step;
    constexpr double kConvergedGain = 1e-6;
    double gain = 0.0;
    for (int s = 0; s < steps; ++s) {
      const double gnorm = grad.norm();
      if (!(gnorm > 1e-10)) break;
      bool improved = false;
      for (int attempt = 0; attempt < 30; ++attempt) {
        const Vector trial = (p + step * grad / gnorm).cwiseMax(lower).cwiseMin(upper);
        const double trial_lml = log_marginal_likelihood(j, trial);
        if (std::isfinite(trial_lml) && trial_lml > lml) {
          gain = trial_lml - lml;
          p = trial;
          lml = log_marginal_likelihood(j, p, &grad);
          step = std::min(step * 1.5, 2.0);
          improved = true;
          break;
        }
        step *= 0.5;
        if (step < 1e-8) break;
      }
      if (!improved) break;
      ++report.steps_taken;
      if (gain < kConvergedGain) break;
    }
    caches_[j].fit_step = std::max(step, 1e-3);
    report.lml_after = lml;
    const GpHyperparams previous = hyper_[j];
    try {
      hyper_[j] = unpack(p);
      rebuild(j);
    } catch (const NumericalDegeneracy& e) {
      hyper_[j] = previous;
      rebuild(j);
      report.aborted = true;
      report.message = std::string("fit aborted: ") + e.what();
    }
    return report;
  }

 private:
  struct Cache {
    Matrix lower;          // Cholesky factor of K + (noise + jitter) I
    Vector weights;        // (K + noise I)^-1 (y - prior_mean)
    double prior_mean = 0.0;
    double jitter = 0.0;
    double fit_step = 0.5;
    bool valid = true;
  };

  static Vector cross_kernel(const GpHyperparams& h, const Eigen::Ref<const Matrix>& x, const Vector& q) {
    const Eigen::ArrayXd inv = h.length_scales.array().inverse();
    Vector k(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      k[i] = h.signal_variance * std::exp(-0.5 * ((x.row(i).transpose() - q).array() * inv).square().sum());
    }
    return k;
  }

  static Matrix gram(const GpHyperparams& h, const Matrix& x) {
    const auto n = x.rows();
    const Eigen::ArrayXd inv = h.length_scales.array().inverse();
    Matrix k(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
      k(c, c) = h.signal_variance;
      for (Eigen::Index r = c + 1; r < n; ++r) {
        const double v = h.signal_variance * std::exp(-0.5 * ((x.row(r) - x.row(c)).transpose().array() * inv).square().sum());
        k(r, c) = v;
        k(c, r) = v;
      }
    }
    return k;
  }

  void rebuild(std::size_t j) {
    auto& c = caches_[j];
    const auto& h = hyper_[j];
    const auto n = inputs_.rows();
    if (n == 0) {
      c.lower = Matrix(0, 0);
      c.weights = Vector(0);
      c.prior_mean = 0.0;
      c.jitter = 0.0;
      c.valid = true;
      return;
    }
    Matrix k = gram(h, inputs_);
    k.diagonal().array() += h.noise_variance;
    CholeskyFactor f = cholesky_with_ridge(k, options_.ridge);
    c.lower = std::move(f.lower);
    c.jitter = f.ridge;
    c.valid = true;
    refresh_weights(j);
  }

  void refresh_weights(std::size_t j) {
    auto& c = caches_[j];
    const auto col = outputs_.col(static_cast<Eigen::Index>(j));
    c.prior_mean = col.mean();
    Vector r = col.array() - c.prior_mean;
    c.lower.triangularView<Eigen::Lower>().solveInPlace(r);
    c.lower.triangularView<Eigen::Lower>().transpose().solveInPlace(r);
    c.weights = std::move(r);
  }

  [[nodiscard]] Vector lower_bounds(std::size_t j) const {
    Vector b(static_cast<Eigen::Index>(d_ + 2));
    const double v = output_variance(j) > 0.0 ? output_variance(j) : 1.0;
    b[0] = std::log(1e-6 * v);
    for (std::size_t d = 0; d < d_; ++d) b[static_cast<Eigen::Index>(d + 1)] = std::log(1e-3 * input_range(d));
    b[static_cast<Eigen::Index>(d_ + 1)] = std::log(noise_floor(j));
    return b;
  }

  [[nodiscard]] Vector upper_bounds(std::size_t j) const {
    Vector b(static_cast<Eigen::Index>(d_ + 2));
    const double v = output_variance(j) > 0.0 ? output_variance(j) : 1.0;
    b[0] = std::log(1e6 * v);
    for (std::size_t d = 0; d < d_; ++d) b[static_cast<Eigen::Index>(d + 1)] = std::log(1e3 * input_range(d));
    b[static_cast<Eigen::Index>(d_ + 1)] = std::log(10.0 * v);
    return b;
  }

  [[nodiscard]] double input_range(std::size_t d) const {
    if (inputs_.rows() < 2) return 1.0;
    const auto col = inputs_.col(static_cast<Eigen::Index>(d));
    const double r = col.maxCoeff() - col.minCoeff();
    return r > 0.0 ? r : 1.0;
  }

  std::size_t d_ = 0;
  std::size_t j_ = 0;
  SurrogateOptions options_;
  Matrix inputs_;
  Matrix raw_outputs_;
  Matrix outputs_;
  std::vector<GpHyperparams> hyper_;
  std::vector<Cache> caches_;

  friend SurrogateState load_surrogate(std::istream& in);
};

// -- free-function surface ---------------------------------------------------

inline BivariatePredictive gp_bivariate_predict(const SurrogateState& s, std::size_t j, const Vector& theta,
                                                const Vector& theta_prime) {
  return s.predict(j, theta, theta_prime);
}

/// One correlated draw (mu_theta', mu_theta).
inline std::pair<double, double> sample_bivariate(const BivariatePredictive& b, RngStream& rng) {
  const Eigen::Vector2d draw = mvn_draw(b.mean, psd_sqrt(b.covariance), rng);
  return {draw[0], draw[1]};
}

inline void insert_training_point(SurrogateState& s, const Vector& theta, const Vector& x) { s.insert(theta, x); }

/// theta or theta', whichever has the larger summed latent variance; ties go to theta'.
inline Vector acquire_location(const SurrogateState& s, const Vector& theta, const Vector& theta_prime) {
  double var_theta = 0.0;
  double var_prime = 0.0;
  for (std::size_t j = 0; j < s.stat_dim(); ++j) {
    var_theta += s.marginal_variance(j, theta);
    var_prime += s.marginal_variance(j, theta_prime);
  }
  return var_theta > var_prime ? theta : theta_prime;
}

inline std::vector<FitReport> fit_hyperparams(SurrogateState& s, int steps) {
  std::vector<FitReport> reports;
  if (steps <= 0) return reports;
  for (std::size_t j = 0; j < s.stat_dim(); ++j) reports.push_back(s.fit(j, steps));
  return reports;
}

// -- checkpoints ---------------------------------------------------------------
//
// Text format, version 1. Every real is written as a C99 hex float so a
// reload reproduces inputs, outputs and hyperparameters bit for bit:
//
//   gpsabc-surrogate 1
//   dims <D> <J> <N>
//   noise_floor_fraction <r>
//   transforms <identity|log|log1p> x J
//   hyper <j> <signal variance> <length-scale> x D <noise variance>     (J lines)
//   point <theta> x D <raw statistic> x J                                 (N lines)
//
// Caches are rebuilt on load.

inline const char* transform_name(OutputTransform t) {
  switch (t) {
    case OutputTransform::kLog:
      return "log";
    case OutputTransform::kLog1p:
      return "log1p";
    case OutputTransform::kIdentity:
      break;
  }
  return "identity";
}

inline OutputTransform parse_transform(const std::string& name) {
  if (name == "identity") return OutputTransform::kIdentity;
  if (name == "log") return OutputTransform::kLog;
  if (name == "log1p") return OutputTransform::kLog1p;
  throw InvalidArgument("unknown output transform: " + name);
}

inline void save_surrogate(const SurrogateState& s, std::ostream& out) {
  out << "gpsabc-surrogate 1\n";
  out << "dims " << s.param_dim() << ' ' << s.stat_dim() << ' ' << s.size() << '\n';
  out << std::hexfloat;
  out << "noise_floor_fraction " << s.options().noise_floor_fraction << '\n';
  out << "transforms";
  for (std::size_t j = 0; j < s.stat_dim(); ++j) out << ' ' << transform_name(s.transform(j));
  out << '\n';
  for (std::size_t j = 0; j < s.stat_dim(); ++j) {
    const auto& h = s.hyperparams(j);
    out << "hyper " << j << ' ' << h.signal_variance;
    for (Eigen::Index d = 0; d < h.length_scales.size(); ++d) out << ' ' << h.length_scales[d];
    out << ' ' << h.noise_variance << '\n';
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << "point";
    for (std::size_t d = 0; d < s.param_dim(); ++d) out << ' ' << s.inputs()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < s.stat_dim(); ++j) out << ' ' << s.raw_outputs()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    out << '\n';
  }
  out << std::defaultfloat;
}

namespace detail {
inline double read_real(std::istringstream& in, std::size_t line) {
  std::string token;
  if (!(in >> token)) throw ParseError("missing value", line);
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size()) throw ParseError("bad real '" + token + "'", line);
  return v;
}

inline std::istringstream expect_line(std::istream& in, const std::string& tag, std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("unexpected end of file, wanted '" + tag + "'", line_no + 1);
  ++line_no;
  std::istringstream ss(line);
  std::string head;
  ss >> head;
  if (head != tag) throw ParseError("expected '" + tag + "', found '" + head + "'", line_no);
  return ss;
}
}  // namespace detail

inline SurrogateState load_surrogate(std::istream& in) {
  std::size_t line_no = 0;
  auto header = detail::expect_line(in, "gpsabc-surrogate", line_no);
  int version = 0;
  header >> version;
  if (version != 1) throw ParseError("unsupported surrogate checkpoint version", line_no);
  auto dims = detail::expect_line(in, "dims", line_no);
  std::size_t d = 0;
  std::size_t j = 0;
  std::size_t n = 0;
  if (!(dims >> d >> j >> n)) throw ParseError("bad dims line", line_no);
  SurrogateOptions options;
  auto floor_line = detail::expect_line(in, "noise_floor_fraction", line_no);
  options.noise_floor_fraction = detail::read_real(floor_line, line_no);
  auto transforms = detail::expect_line(in, "transforms", line_no);
  for (std::size_t k = 0; k < j; ++k) {
    std::string name;
    if (!(transforms >> name)) throw ParseError("missing transform", line_no);
    options.transforms.push_back(parse_transform(name));
  }
  SurrogateState s(d, j, options);
  for (std::size_t k = 0; k < j; ++k) {
    auto hl = detail::expect_line(in, "hyper", line_no);
    std::size_t idx = 0;
    hl >> idx;
    if (idx != k) throw ParseError("hyperparameter lines out of order", line_no);
    GpHyperparams h;
    h.signal_variance = detail::read_real(hl, line_no);
    h.length_scales.resize(static_cast<Eigen::Index>(d));
    for (std::size_t q = 0; q < d; ++q) h.length_scales[static_cast<Eigen::Index>(q)] = detail::read_real(hl, line_no);
    h.noise_variance = detail::read_real(hl, line_no);
    s.hyper_[k] = h;
  }
  s.inputs_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  s.raw_outputs_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
  s.outputs_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
  for (std::size_t i = 0; i < n; ++i) {
    auto pl = detail::expect_line(in, "point", line_no);
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t q = 0; q < d; ++q) s.inputs_(row, static_cast<Eigen::Index>(q)) = detail::read_real(pl, line_no);
    for (std::size_t q = 0; q < j; ++q) {
      const double x = detail::read_real(pl, line_no);
      s.raw_outputs_(row, static_cast<Eigen::Index>(q)) = x;
      s.outputs_(row, static_cast<Eigen::Index>(q)) = warp(options.transforms[q], x);
    }
  }
  s.rebuild();
  return s;
}

inline void save_surrogate(const SurrogateState& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open for writing: " + path);
  save_surrogate(s, out);
}

inline SurrogateState load_surrogate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open surrogate checkpoint: " + path);
  return load_surrogate(in);
}

}  // namespace gpsabc
