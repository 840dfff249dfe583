// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The cellfree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cellfree {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Raised when an input file or in-memory dataset is malformed or inconsistent.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for a named sub-stream (scenario drop, channels, noise, ...).
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
  return mix_seed(parent ^ mix_seed(stream + 0x632BE59BD9B4E019ULL));
}

/// Seed namespaces occupy the top 8 bits so seeds from different namespaces never collide.
enum class SeedNamespace : std::uint8_t { kTrain = 0x1, kTest = 0x2, kBench = 0x3, kValidation = 0x4 };

constexpr std::uint64_t namespaced_seed(std::uint64_t master, SeedNamespace ns, std::uint64_t index) {
  constexpr std::uint64_t kLowMask = (std::uint64_t{1} << 56) - 1;
  const std::uint64_t low = mix_seed(mix_seed(master) ^ mix_seed(index ^ 0xD1B54A32D192ED03ULL)) & kLowMask;
  return (static_cast<std::uint64_t>(ns) << 56) | low;
}

constexpr SeedNamespace seed_namespace(std::uint64_t seed) {
  return static_cast<SeedNamespace>(seed >> 56);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace cellfree
