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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cellfree/common.hpp"

namespace cellfree {

enum class CorrelationModel { kUncorrelated, kLocalScattering };
enum class ApPlacement { kGrid, kUniformRandom };

/// Scenario constants. Defaults reproduce the urban-microcell setup (16 APs, 20 UEs, 1 km square).
struct NetworkConfig {
  int num_aps = 16;       // L
  int num_ues = 20;       // K
  int num_antennas = 4;   // N
  double area_m = 1000.0;
  int tau_c = 200;
  int tau_p = 10;
  double p_ul = 0.1;          // W
  double p_max_dl = 1.0;      // W
  double noise_power = 3.981071705534969e-13;  // W, -94 dBm
  double pathloss_offset_db = -30.5;
  double pathloss_slope_db = 36.7;
  double v_exponent = 0.6;
  CorrelationModel correlation = CorrelationModel::kUncorrelated;
  double angular_spread_deg = 10.0;
  ApPlacement ap_placement = ApPlacement::kGrid;
  std::uint64_t seed = 1;

  int tau_d() const { return tau_c - tau_p; }
  double prelog() const { return static_cast<double>(tau_d()) / tau_c; }

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Scenario {
  std::vector<Point> ap_positions;
  std::vector<Point> ue_positions;
  Matrix distances;  // K x L, wrap-around metric with 1 m floor
};

/// Per-(UE, AP) second-order statistics.
struct ChannelStatistics {
  int num_ues = 0;
  int num_aps = 0;
  int num_antennas = 0;
  Matrix beta;               // K x L, linear scale
  std::vector<CMatrix> R;    // K*L matrices, index k * L + l

  const CMatrix& corr(int k, int l) const { return R[static_cast<std::size_t>(k) * num_aps + l]; }
  CMatrix& corr(int k, int l) { return R[static_cast<std::size_t>(k) * num_aps + l]; }
};

inline constexpr double kMinDistance = 1.0;

/// Displacement from p to the nearest of the 9 torus images of q.
Point wrap_displacement(Point p, Point q, double area_m);

/// Torus distance over the 9 images of q, floored at 1 m.
double wrap_distance(Point p, Point q, double area_m);

/// Linear LSF gain offset_db - slope_db * log10(d). Rejects d < 1 m.
double pathloss_beta(double d, double offset_db = -30.5, double slope_db = 36.7);

/// AP sites: cell-centred sqrt(L) x sqrt(L) grid, or uniform draws from the network seed.
std::vector<Point> place_aps(const NetworkConfig& cfg);

/// UEs uniform on the square; deterministic in `seed`. AP sites come from place_aps.
Scenario drop_scenario(const NetworkConfig& cfg, std::uint64_t seed);

/// Local-scattering correlation of a half-wavelength ULA with Gaussian angular spread,
/// normalized so that tr(R)/N = beta.
CMatrix local_scattering_correlation(int num_antennas, double beta, double nominal_angle_rad,
                                     double angular_spread_rad);

ChannelStatistics build_statistics(const NetworkConfig& cfg, const Scenario& scenario);

/// Max deviation of an eigenvalue below zero plus Hermitian residual; 0 for an exact PSD input.
double hermitian_psd_violation(const CMatrix& m);

}  // namespace cellfree
