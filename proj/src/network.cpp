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

#include "cellfree/network.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace cellfree {

void NetworkConfig::validate() const {
  if (num_aps < 1 || num_ues < 1 || num_antennas < 1) {
    throw std::invalid_argument("L, K and N must be at least 1");
  }
  if (tau_p < 1 || tau_p > tau_c) throw std::invalid_argument("need 1 <= tau_p <= tau_c");
  if (!(p_max_dl > 0.0)) throw std::invalid_argument("p_max_dl must be positive");
  if (!(noise_power > 0.0)) throw std::invalid_argument("noise_power must be positive");
  if (!(p_ul > 0.0)) throw std::invalid_argument("p_ul must be positive");
  if (!(area_m > 0.0)) throw std::invalid_argument("area_m must be positive");
  if (ap_placement == ApPlacement::kGrid) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(num_aps))));
    if (side * side != num_aps) throw std::invalid_argument("grid AP placement needs a square AP count");
  }
}

Point wrap_displacement(Point p, Point q, double area_m) {
  Point best{q.x - p.x, q.y - p.y};
  double best_d2 = best.x * best.x + best.y * best.y;
  for (int sx = -1; sx <= 1; ++sx) {
    for (int sy = -1; sy <= 1; ++sy) {
      const double dx = q.x + sx * area_m - p.x;
      const double dy = q.y + sy * area_m - p.y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = {dx, dy};
      }
    }
  }
  return best;
}

double wrap_distance(Point p, Point q, double area_m) {
  const Point d = wrap_displacement(p, q, area_m);
  return std::max(kMinDistance, std::hypot(d.x, d.y));
}

double pathloss_beta(double d, double offset_db, double slope_db) {
  if (!(d >= kMinDistance)) throw std::invalid_argument("pathloss distance below 1 m");
  return db_to_linear(offset_db - slope_db * std::log10(d));
}

std::vector<Point> place_aps(const NetworkConfig& cfg) {
  cfg.validate();
  std::vector<Point> aps;
  if (cfg.ap_placement == ApPlacement::kGrid) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cfg.num_aps))));
    const double spacing = cfg.area_m / side;
    for (int row = 0; row < side; ++row) {
      for (int col = 0; col < side; ++col) aps.push_back({(col + 0.5) * spacing, (row + 0.5) * spacing});
    }
  } else {
    // Tied to the network seed: AP sites are fixed across UE drops.
    std::mt19937_64 rng(derive_seed(cfg.seed, 0xA9A9));
    std::uniform_real_distribution<double> coord(0.0, cfg.area_m);
    for (int l = 0; l < cfg.num_aps; ++l) {
      const double x = coord(rng);
      aps.push_back({x, coord(rng)});
    }
  }
  return aps;
}

Scenario drop_scenario(const NetworkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Scenario s;
  std::mt19937_64 rng(derive_seed(seed, 0x5CE7A210));
  std::uniform_real_distribution<double> coord(0.0, cfg.area_m);

  s.ap_positions = place_aps(cfg);

  for (int k = 0; k < cfg.num_ues; ++k) {
    const double x = coord(rng);
    s.ue_positions.push_back({x, coord(rng)});
  }

  s.distances.resize(cfg.num_ues, cfg.num_aps);
  for (int k = 0; k < cfg.num_ues; ++k) {
    for (int l = 0; l < cfg.num_aps; ++l) {
      s.distances(k, l) = wrap_distance(s.ap_positions[l], s.ue_positions[k], cfg.area_m);
    }
  }
  return s;
}

CMatrix local_scattering_correlation(int num_antennas, double beta, double nominal_angle_rad,
                                     double angular_spread_rad) {
  // Closed-form Gaussian angular-spread model; entries depend on the antenna index difference only.
  CMatrix r(num_antennas, num_antennas);
  for (int m = 0; m < num_antennas; ++m) {
    for (int n = 0; n < num_antennas; ++n) {
      const double dist = m - n;
      const double phase = std::numbers::pi * dist * std::sin(nominal_angle_rad);
      const double spread = std::numbers::pi * dist * std::cos(nominal_angle_rad) * angular_spread_rad;
      r(m, n) = beta * std::polar(std::exp(-0.5 * spread * spread), phase);
    }
  }
  return r;
}

ChannelStatistics build_statistics(const NetworkConfig& cfg, const Scenario& scenario) {
  ChannelStatistics st;
  st.num_ues = cfg.num_ues;
  st.num_aps = cfg.num_aps;
  st.num_antennas = cfg.num_antennas;
  st.beta.resize(cfg.num_ues, cfg.num_aps);
  st.R.resize(static_cast<std::size_t>(cfg.num_ues) * cfg.num_aps);
  const double spread = cfg.angular_spread_deg * std::numbers::pi / 180.0;

  for (int k = 0; k < cfg.num_ues; ++k) {
    for (int l = 0; l < cfg.num_aps; ++l) {
      const double b = pathloss_beta(scenario.distances(k, l), cfg.pathloss_offset_db, cfg.pathloss_slope_db);
      st.beta(k, l) = b;
      if (cfg.correlation == CorrelationModel::kUncorrelated) {
        st.corr(k, l) = CMatrix::Identity(cfg.num_antennas, cfg.num_antennas) * b;
      } else {
        const Point d = wrap_displacement(scenario.ap_positions[l], scenario.ue_positions[k], cfg.area_m);
        st.corr(k, l) = local_scattering_correlation(cfg.num_antennas, b, std::atan2(d.y, d.x), spread);
      }
    }
  }
  return st;
}

double hermitian_psd_violation(const CMatrix& m) {
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return std::max(asym, std::max(0.0, -es.eigenvalues().minCoeff()));
}

}  // namespace cellfree
