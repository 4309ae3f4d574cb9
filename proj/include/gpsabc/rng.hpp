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

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "gpsabc/errors.hpp"

namespace gpsabc {

/// Philox4x64-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Bijective in the counter for a fixed key.
inline std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                               std::array<std::uint64_t, 2> key) noexcept {
  constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const unsigned __int128 p0 = static_cast<unsigned __int128>(kMul0) * ctr[0];
    const unsigned __int128 p1 = static_cast<unsigned __int128>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint64_t>(p0 >> 64);
    const auto lo0 = static_cast<std::uint64_t>(p0);
    const auto hi1 = static_cast<std::uint64_t>(p1 >> 64);
    const auto lo1 = static_cast<std::uint64_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Counter-based random stream. The key is the seed; the stream id occupies
/// the third counter word, so streams with distinct ids never share a block.
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0) noexcept
      : seed_(seed), stream_id_(stream_id) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (index_ == 4) {
      buffer_ = philox4x64({block_, 0, stream_id_, 0}, {seed_, 0});
      ++block_;
      index_ = 0;
    }
    return buffer_[index_++];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1); safe to take logs of.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method; the spare variate is kept.
  double standard_normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// A fresh stream sharing this seed under another id.
  [[nodiscard]] RngStream substream(std::uint64_t stream_id) const noexcept {
    return RngStream(seed_, stream_id);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  int index_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Hands out consecutive substreams of one seed. Id 0 is reserved for the
/// owner's own decision stream.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t seed, std::uint64_t first_id = 1) noexcept
      : seed_(seed), next_(first_id) {}

  RngStream next() noexcept { return RngStream(seed_, next_++); }
  [[nodiscard]] std::uint64_t issued_up_to() const noexcept { return next_; }

 private:
  std::uint64_t seed_;
  std::uint64_t next_;
};

inline double normal_draw(RngStream& rng, double mean, double std) {
  if (!(std >= 0.0)) throw InvalidArgument("normal_draw: std must be non-negative");
  if (std == 0.0) return mean;
  return mean + std * rng.standard_normal();
}

inline double exponential_draw(RngStream& rng, double rate) {
  if (!(rate > 0.0)) throw InvalidArgument("exponential_draw: rate must be positive");
  return -std::log(rng.uniform_open()) / rate;
}

namespace detail {

// Marsaglia & Tsang (2000) for shape >= 1, unit rate.
inline double gamma_unit_ge1(RngStream& rng, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.standard_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

}  // namespace detail

/// Log of a Gamma(shape, rate) variate. Shapes below 1 use the
/// G(a) = G(a + 1) U^(1/a) boost, carried out in log space so tiny shapes
/// do not underflow.
inline double log_gamma_draw(RngStream& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw InvalidArgument("gamma_draw: shape and rate must be positive");
  }
  double log_g = 0.0;
  if (shape < 1.0) {
    log_g = std::log(detail::gamma_unit_ge1(rng, shape + 1.0)) + std::log(rng.uniform_open()) / shape;
  } else {
    log_g = std::log(detail::gamma_unit_ge1(rng, shape));
  }
  return log_g - std::log(rate);
}

/// Gamma(shape, rate) variate, mean shape / rate.
/// Shapes >= 1 skip the log-space round trip.
inline double gamma_draw(RngStream& rng, double shape, double rate) {
  if (shape >= 1.0 && rate > 0.0) return detail::gamma_unit_ge1(rng, shape) / rate;
  return std::exp(log_gamma_draw(rng, shape, rate));
}

}  // namespace gpsabc
