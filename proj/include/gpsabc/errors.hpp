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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gpsabc {

/// Bad argument passed to a library operation (negative std, NaN, size mismatch).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fewer samples than an estimator needs.
class InsufficientSamples : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A matrix could not be factorized even after the maximum ridge was added.
class NumericalDegeneracy : public std::runtime_error {
 public:
  NumericalDegeneracy(const std::string& what, double ridge)
      : std::runtime_error(what + " (last ridge " + std::to_string(ridge) + ")"), ridge_(ridge) {}

  [[nodiscard]] double ridge() const noexcept { return ridge_; }

 private:
  double ridge_;
};

/// Parameters outside the simulator's domain after the sampling transform.
class SimulatorDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The simulator produced non-finite output.
class SimulationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run configuration or manifest is invalid.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gpsabc
