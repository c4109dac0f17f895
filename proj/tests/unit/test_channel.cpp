// Copyright 2026 The AirBreathe Authors. All Rights Reserved.
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
// =============================================================================

#include <doctest.h>

#include <cmath>

#include "airbreathe/channel.hpp"
#include "airbreathe/error.hpp"
#include "airbreathe/rng.hpp"
#include "oracles/oracles.hpp"

using namespace airbreathe;

TEST_CASE("activation probability") {
  CHECK(activation_probability(0.0) == 1.0);
  CHECK(activation_probability(0.2) == doctest::Approx(0.8187307531));
  CHECK(activation_probability(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(activation_probability(-0.1), ConfigError);
}

TEST_CASE("draw_channels invariants") {
  Rng rng(4);
  CHECK(draw_channels(50, 0.0, 1.0, rng).active_count() == 50);
  CHECK_THROWS_AS(draw_channels(3, -1.0, 1.0, rng), ConfigError);
  CHECK_THROWS_AS(draw_channels(3, 0.2, 0.0, rng), ConfigError);

  const double p0 = 3.0;
  for (int t = 0; t < 200; ++t) {
    auto c = draw_channels(10, 0.2, p0, rng);
    for (std::size_t k = 0; k < 10; ++k) {
      if (c.active[k]) {
        CHECK(std::norm(c.h[k]) >= 0.2);
        auto hp = c.h[k] * c.p[k];
        CHECK(std::abs(hp.real() - std::sqrt(p0)) < 1e-12);
        CHECK(std::abs(hp.imag()) < 1e-12);
      } else {
        CHECK(std::norm(c.h[k]) < 0.2);
        CHECK(c.p[k] == std::complex<double>(0, 0));
      }
    }
  }
}

TEST_CASE("fading has unit variance") {
  Rng rng(12);
  double acc = 0;
  const int n = 20000;
  for (int t = 0; t < n; ++t) acc += std::norm(draw_channels(1, 0.0, 1.0, rng).h[0]);
  CHECK(std::abs(acc / n - 1.0) < 0.03);
}

TEST_CASE("active count is binomial") {
  Rng rng = make_stream(13, Stream::kChannel);
  const std::size_t k = 10;
  const double xi = std::exp(-0.2);
  const int rounds = 10000;
  double s = 0, s2 = 0;
  for (int t = 0; t < rounds; ++t) {
    double a = static_cast<double>(draw_channels(k, 0.2, 1.0, rng).active_count());
    s += a;
    s2 += a * a;
  }
  double mean = s / rounds, var = s2 / rounds - mean * mean;
  double true_var = k * xi * (1 - xi);
  CHECK(std::abs(mean - k * xi) <= 3 * std::sqrt(true_var / rounds));
  // Var of the sample variance is about 2 sigma^4 / n for near-normal counts.
  CHECK(std::abs(var - true_var) <= 3 * true_var * std::sqrt(2.0 / rounds) * 1.5);
}

TEST_CASE("transmit_round superposition") {
  ChannelRealization chan;
  chan.h = {{1, 0}, {0.1, 0}};
  chan.p = {{1, 0}, {0, 0}};
  chan.active = {true, false};
  Rng rng(1);
  std::vector<std::vector<double>> chips = {{1, -2, 3}, {}};
  auto f = transmit_round(chips, chan, InterferenceProfile{0.0}, rng);
  REQUIRE(f.size() == 3);
  CHECK(f.symbols[1] == std::complex<double>(-2, 0));

  std::vector<std::vector<double>> bad = {{1, 2}, {1, 2, 3}};
  CHECK_THROWS_AS(transmit_round(bad, chan, InterferenceProfile{0.0}, rng), ConfigError);
  CHECK_THROWS_AS(transmit_round(std::vector<std::vector<double>>{{1}}, chan, {0.0}, rng),
                  ConfigError);
}

TEST_CASE("silent frame is pure interference") {
  ChannelRealization chan;
  chan.h = {{0.1, 0}, {0.2, 0}};
  chan.p = {{0, 0}, {0, 0}};
  chan.active = {false, false};
  Rng rng(2);
  const std::size_t n = 100000;
  std::vector<std::vector<double>> chips = {std::vector<double>(n, 1.0), std::vector<double>(n, 1.0)};
  PowerLedger ledger(2);
  auto f = transmit_round(chips, chan, InterferenceProfile{2.0}, rng, &ledger);
  double s = 0, s2 = 0;
  for (auto z : f.symbols) {
    s += z.real();
    s2 += z.real() * z.real();
  }
  double var = s2 / n - (s / n) * (s / n);
  CHECK(std::abs(var - 2.0) < 0.03 * 2.0);
  CHECK(audit_power(ledger).mean_energy == 0.0);
}

TEST_CASE("power ledger and audit") {
  PowerLedger empty(3, 10.0);
  auto a0 = audit_power(empty);
  CHECK(a0.mean_energy == 0.0);
  CHECK(a0.mean_energy_per_round == 0.0);

  const std::size_t d = 16;
  ChannelRealization chan;
  chan.h = {{1.0 / std::sqrt(2.0), 0}};
  chan.p = {{std::sqrt(2.0), 0}};
  chan.active = {true};
  PowerLedger ledger(1, 16.0);
  Rng rng(1);
  transmit_round(std::vector<std::vector<double>>{std::vector<double>(d, 1.0)}, chan, {0.0}, rng,
                 &ledger);
  ledger.end_round();
  auto a = audit_power(ledger);
  CHECK(a.energy[0] == doctest::Approx(2.0 * d));
  CHECK(a.budget_fraction[0] == doctest::Approx(2.0));
  CHECK(a.devices_over_budget == 1);
  CHECK(a.mean_energy_per_round == doctest::Approx(2.0 * d));
  CHECK_THROWS_AS(ledger.add(0, -1.0), ConfigError);
}

TEST_CASE("ledger energy matches the conditional inverse-gain expectation") {
  const double g_th = 0.2, p0 = 1.5;
  const std::size_t d = 8;
  Rng rng = make_stream(14, Stream::kChannel);
  PowerLedger ledger(1);
  std::size_t active_rounds = 0;
  Rng noise(0);
  for (int t = 0; t < 200000; ++t) {
    auto c = draw_channels(1, g_th, p0, rng);
    if (!c.active[0]) continue;
    ++active_rounds;
    transmit_round(std::vector<std::vector<double>>{std::vector<double>(d, 1.0)}, c, {0.0}, noise,
                   &ledger);
  }
  double mean = ledger.cumulative(0) / static_cast<double>(active_rounds);
  double expect = d * p0 * oracle::inverse_gain_expectation(g_th);
  CHECK(std::abs(mean - expect) <= 0.05 * expect);
}
