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

#include <doctest.h>

#include <random>

#include "cellfree/config.hpp"
#include "cellfree/network.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cellfree;

TEST_CASE("wrap distance examples") {
  CHECK(wrap_distance({0, 0}, {0, 0}, 1000) == 1.0);
  CHECK(wrap_distance({0, 0}, {999, 0}, 1000) == doctest::Approx(1.0).epsilon(1e-12));
  const double expect = oracle::torus_distance({100, 100}, {600, 900}, 1000);
  CHECK(wrap_distance({100, 100}, {600, 900}, 1000) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(expect == doctest::Approx(std::sqrt(500.0 * 500.0 + 200.0 * 200.0)));
}

TEST_CASE("wrap distance agrees with nine-image enumeration") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 750.0);
  for (int t = 0; t < 2000; ++t) {
    const Point p{u(rng), u(rng)};
    const Point q{u(rng), u(rng)};
    const double d = wrap_distance(p, q, 750.0);
    REQUIRE(d == doctest::Approx(oracle::torus_distance(p, q, 750.0)).epsilon(1e-13));
    REQUIRE(d <= 750.0 * std::sqrt(2.0) / 2.0 + 1e-9);
    REQUIRE(d == doctest::Approx(wrap_distance(q, p, 750.0)).epsilon(1e-13));
  }
}

TEST_CASE("pathloss values") {
  CHECK(linear_to_db(pathloss_beta(1.0)) == doctest::Approx(-30.5).epsilon(1e-14));
  CHECK(linear_to_db(pathloss_beta(10.0)) == doctest::Approx(-67.2).epsilon(1e-14));
  const double db = static_cast<double>(oracle::pathloss_db(353.0L));
  CHECK(linear_to_db(pathloss_beta(353.0)) == doctest::Approx(db).epsilon(1e-13));
  CHECK_THROWS_AS(pathloss_beta(0.5), std::invalid_argument);
  double prev = pathloss_beta(1.0);
  for (double d = 1.5; d < 2000.0; d *= 1.37) {
    const double b = pathloss_beta(d);
    REQUIRE(b < prev);
    prev = b;
  }
}

TEST_CASE("grid placement is cell-centred") {
  NetworkConfig cfg;
  const auto aps = place_aps(cfg);
  REQUIRE(aps.size() == 16);
  CHECK(aps[0].x == doctest::Approx(125.0));
  CHECK(aps[0].y == doctest::Approx(125.0));
  double min_gap = 1e9;
  for (std::size_t i = 0; i < aps.size(); ++i) {
    for (std::size_t j = i + 1; j < aps.size(); ++j) min_gap = std::min(min_gap, std::hypot(aps[i].x - aps[j].x, aps[i].y - aps[j].y));
  }
  CHECK(min_gap == doctest::Approx(250.0));
  cfg.num_aps = 12;
  CHECK_THROWS(place_aps(cfg));
}

TEST_CASE("scenario determinism and bounds") {
  const NetworkConfig cfg;
  const Scenario a = drop_scenario(cfg, 42);
  const Scenario b = drop_scenario(cfg, 42);
  const Scenario c = drop_scenario(cfg, 43);
  CHECK(a.distances == b.distances);
  CHECK(a.distances != c.distances);
  for (const auto& p : a.ue_positions) {
    CHECK(p.x >= 0.0);
    CHECK(p.x < cfg.area_m);
    CHECK(p.y >= 0.0);
    CHECK(p.y < cfg.area_m);
  }
}

TEST_CASE("uniform UE drops are centred") {
  NetworkConfig cfg;
  cfg.num_ues = 100000;
  cfg.num_aps = 1;
  const Scenario s = drop_scenario(cfg, 9);
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : s.ue_positions) {
    mx += p.x;
    my += p.y;
  }
  mx /= cfg.num_ues;
  my /= cfg.num_ues;
  const double se = cfg.area_m / std::sqrt(12.0 * cfg.num_ues);
  CHECK(std::abs(mx - 500.0) < 3.0 * se);
  CHECK(std::abs(my - 500.0) < 3.0 * se);
}

TEST_CASE("uncorrelated statistics") {
  const NetworkConfig cfg;
  const ChannelStatistics st = build_statistics(cfg, drop_scenario(cfg, 5));
  for (int k = 0; k < cfg.num_ues; ++k) {
    for (int l = 0; l < cfg.num_aps; ++l) {
      const double beta = st.beta(k, l);
      REQUIRE(beta > 0.0);
      REQUIRE(beta <= std::pow(10.0, -3.05) * (1 + 1e-12));
      REQUIRE((st.corr(k, l) - CMatrix::Identity(4, 4) * beta).norm() == 0.0);
    }
  }
}

TEST_CASE("local scattering normalization and limits") {
  for (const double spread : {0.0, 5.0, 10.0, 30.0}) {
    const CMatrix r = local_scattering_correlation(6, 0.01, 0.7, spread * std::numbers::pi / 180.0);
    CHECK(r.trace().real() / 6.0 == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(hermitian_psd_violation(r) < 1e-10 * 0.01);
  }
  const CMatrix narrow = local_scattering_correlation(8, 0.02, 0.3, 1e-6);
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(narrow);
  CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(8 * 0.02).epsilon(1e-6));

  NetworkConfig cfg;
  cfg.correlation = CorrelationModel::kLocalScattering;
  const ChannelStatistics st = build_statistics(cfg, drop_scenario(cfg, 5));
  for (int k = 0; k < cfg.num_ues; ++k) {
    for (int l = 0; l < cfg.num_aps; ++l) {
      REQUIRE(st.corr(k, l).trace().real() / cfg.num_antennas == doctest::Approx(st.beta(k, l)).epsilon(1e-12));
      REQUIRE(hermitian_psd_violation(st.corr(k, l)) <= 1e-10 * st.beta(k, l));
    }
  }
}

TEST_CASE("config files") {
  const auto kv = KeyValueFile::parse("num_aps = 9 # three by three\nnum_ues=5\n\nnoise_power_dbm = -94\n");
  const NetworkConfig cfg = network_config_from(kv);
  CHECK(cfg.num_aps == 9);
  CHECK(cfg.num_ues == 5);
  CHECK(cfg.noise_power == doctest::Approx(3.981071705534969e-13).epsilon(1e-12));
  const NetworkConfig again = network_config_from(KeyValueFile::parse(to_config_text(cfg)));
  CHECK(to_config_text(again) == to_config_text(cfg));
  CHECK(again.noise_power == cfg.noise_power);

  CHECK_THROWS_AS(KeyValueFile::parse("num_apps = 4\n").reject_unknown(network_config_keys()), DataError);
  CHECK_THROWS_AS(KeyValueFile::parse("num_aps = 4\nnum_aps = 9\n"), DataError);
  CHECK_THROWS_AS(network_config_from(KeyValueFile::parse("num_aps = four\n")), DataError);
  CHECK_THROWS_AS(network_config_from(KeyValueFile::parse("tau_p = 300\n")), DataError);
  CHECK_THROWS_AS(network_config_from(KeyValueFile::parse("num_aps = 5\n")), DataError);
  CHECK(NetworkConfig{}.tau_d() == 190);
}

TEST_CASE("seed namespaces are disjoint") {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto train = namespaced_seed(7, SeedNamespace::kTrain, i);
    const auto test = namespaced_seed(7, SeedNamespace::kTest, i);
    REQUIRE(seed_namespace(train) == SeedNamespace::kTrain);
    REQUIRE(seed_namespace(test) == SeedNamespace::kTest);
    REQUIRE(train != test);
  }
}
