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
#include <limits>

#include "airbreathe/analysis.hpp"
#include "airbreathe/breathing.hpp"
#include "airbreathe/channel.hpp"
#include "airbreathe/learning.hpp"
#include "airbreathe/rng.hpp"
#include "oracles/oracles.hpp"

using namespace airbreathe;

TEST_CASE("generic pruning mse") {
  CHECK(generic_pruning_mse(3.0, 10, 1.0, 2) == 0.0);
  CHECK(generic_pruning_mse(1.0, 10, 0.5, 2) == doctest::Approx(2.5));
}

TEST_CASE("generic pruning mse against Monte Carlo") {
  // |K| i.i.d. N(0, sigma^2) vectors are averaged, then a random half is kept.
  const std::size_t d = 10, k = 2;
  const double sigma_sq = 1.0;
  Rng rng(31);
  std::normal_distribution<double> n01;
  auto set = PrunableSet::all(d);
  const int trials = 100000;
  double acc = 0;
  for (int t = 0; t < trials; ++t) {
    GradientVector avg(d);
    for (std::size_t j = 0; j < k; ++j)
      for (double& v : avg.values) v += n01(rng) / k;
    auto m = set.draw(5, rng);
    auto kept = zero_pad(prune(avg, m).values, m);
    for (std::size_t i = 0; i < d; ++i) acc += std::pow(avg.values[i] - kept.values[i], 2);
  }
  CHECK(acc / trials == doctest::Approx(generic_pruning_mse(sigma_sq, d, 0.5, k)).epsilon(0.02));
}

TEST_CASE("closed form mse terms") {
  SirConfig cfg;
  cfg.p0 = 2.0;
  cfg.p_i = 3.0;
  cfg.d = 40;
  auto b = closed_form_mse(0.25, 4, cfg, 5.0, 0.5, 0.1);
  CHECK(b.pruning_term == doctest::Approx(0.75 * 5.0));
  CHECK(b.interference_term == doctest::Approx(0.25 * 40 * 3.0 * 0.5 * 0.1 / (4 * 2.0)));
  CHECK(b.total == b.pruning_term + b.interference_term);
  CHECK(closed_form_mse(1.0, 4, cfg, 5.0, 0.5, 0.1).pruning_term == 0.0);
  auto quiet = cfg;
  quiet.p_i = 0.0;
  CHECK(closed_form_mse(0.5, 1, quiet, 5.0, 0.5, 0.1).interference_term == 0.0);
}

TEST_CASE("propagation loss") {
  CHECK(propagation_loss(0.0, 10, 0.8, 0.0) == 0.0);
  CHECK(propagation_loss(4.0, 1, 1.0, 1.0) == doctest::Approx(3.0));
  CHECK(propagation_loss(4.0, 1, 1.0, 1.0, PropagationForm::kAppendix) >= 2.0);
}

TEST_CASE("propagation loss bounds the aggregation gap") {
  // Gap between the all-device average and the active-device AirComp output.
  const std::size_t k = 10, d = 32;
  SirConfig cfg = SirConfig::from_sir_db(-10.0, k, 0.2, d);
  Rng rng(32);
  std::normal_distribution<double> n01;
  std::vector<GradientVector> grads(k, GradientVector(d));
  for (auto& g : grads)
    for (double& v : g.values) v = 0.5 + n01(rng);
  GradientVector full = ideal_aggregate(grads);
  double sigma_g_sq = 0;
  for (const auto& g : grads)
    for (std::size_t i = 0; i < d; ++i) sigma_g_sq += std::pow(g.values[i] - full.values[i], 2) / k;
  MseExperiment ex{4, 0, 0.2, 4000};
  EmpiricalMse mse = empirical_aircomp_mse(grads, cfg, ex, 5);
  double u = propagation_loss(mse.total, k, cfg.xi_a, sigma_g_sq);

  // Empirical E||full - y'||, by re-running the chain and measuring against `full`.
  auto set = PrunableSet::all(d);
  Rng chan = make_stream(6, Stream::kChannel), mask = make_stream(6, Stream::kMask),
      intf = make_stream(6, Stream::kInterference);
  double gap = 0;
  int used = 0;
  for (int t = 0; t < 4000; ++t) {
    auto c = draw_channels(k, 0.2, cfg.p0, chan);
    if (c.active_count() == 0) continue;
    std::vector<GradientVector> act;
    for (auto i : c.active_indices()) act.push_back(grads[i]);
    auto gsi = estimate_gsi(act);
    NormalizationParams p{gsi.mean, std::sqrt(gsi.v_sq)};
    auto m = set.draw_for_depth(4, mask);
    auto pn = PNSequenceSet::generate(m.size(), 4, derive_seed(6, Stream::kPn, t));
    std::vector<std::vector<double>> chips(k);
    for (auto i : c.active_indices()) chips[i] = transmit_chain(grads[i], m, p, pn);
    auto frame = transmit_round(chips, c, InterferenceProfile{cfg.p_i}, intf);
    auto y = receive_chain(frame, pn, p, c.active_count(), cfg.p0, m);
    double e = 0;
    for (std::size_t i = 0; i < d; ++i) e += std::pow(full.values[i] - y.values[i], 2);
    gap += std::sqrt(e);
    ++used;
  }
  CHECK(gap / used <= u);
}

TEST_CASE("rate supermartingale") {
  ConvergenceParams p;
  p.c = 1.0;
  p.epsilon = 0.5;
  p.g_bound_sq = 2.0;
  p.eta = 0.1;
  const double scale = p.epsilon / p.denominator();
  CHECK(p.denominator() == doctest::Approx(2 * 0.1 * 0.5 - 0.01 * 2.0));
  CHECK(rate_supermartingale(p.epsilon, p, 3) == doctest::Approx(scale + 3));
  CHECK(rate_supermartingale(1.7, p, 4) - rate_supermartingale(1.7, p, 3) == doctest::Approx(1.0));
  std::vector<double> w = {1.0, 0.0}, ws = {0.5, 0.0};
  CHECK(rate_supermartingale(w, ws, p, 0) == doctest::Approx(rate_supermartingale(0.25, p, 0)));
  CHECK(p.h_lipschitz() == doctest::Approx(2 * std::sqrt(0.5) / p.denominator()));
  CHECK(shifted_supermartingale(10.0, p, 2.0) ==
        doctest::Approx(10.0 - p.eta * p.h_lipschitz() * 2.0));
  CHECK(p.learning_rate_ok());
  p.eta = 1.0;
  CHECK_FALSE(p.learning_rate_ok());
}

TEST_CASE("W is H-Lipschitz in the first argument outside the success region") {
  ConvergenceParams p;
  p.epsilon = 0.3;
  p.g_bound_sq = 1.5;
  p.eta = 0.05;
  const double h = p.h_lipschitz();
  Rng rng(33);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 500; ++t) {
    std::vector<double> a(3), b(3), z(3, 0.0);
    for (double& v : a) v = n01(rng);
    for (double& v : b) v = n01(rng);
    double na = 0, nb = 0, nd = 0;
    for (int i = 0; i < 3; ++i) {
      na += a[i] * a[i];
      nb += b[i] * b[i];
      nd += (a[i] - b[i]) * (a[i] - b[i]);
    }
    if (na < p.epsilon || nb < p.epsilon) continue;
    double diff = std::abs(rate_supermartingale(a, z, p, 0) - rate_supermartingale(b, z, p, 0));
    CHECK(diff <= h * std::sqrt(nd) + 1e-12);
  }
}

TEST_CASE("failure bound") {
  ConvergenceParams p;
  p.epsilon = 1.0;
  p.g_bound_sq = 1.0;
  p.eta = 0.1;
  std::vector<double> zeros(100000, 0.0);
  auto far = failure_bound(p, zeros, 10.0);
  CHECK_FALSE(far.vacuous);
  CHECK(far.raw < 1e-3);
  CHECK(far.clamped == far.raw);
  CHECK(far.lr_condition);

  std::vector<double> big(10, 5.0);
  auto v = failure_bound(p, big, 10.0);
  CHECK(v.vacuous);
  CHECK(v.clamped == 1.0);

  std::vector<double> short_run(3, 0.0);
  auto w = failure_bound(p, short_run, 10.0);
  CHECK(w.raw >= 1.0);
  CHECK(w.clamped == 1.0);
}

TEST_CASE("bound terms over rounds") {
  SirConfig cfg;
  cfg.p_i = 0.0;
  cfg.d = 10;
  std::vector<RoundErrorStats> r(4, RoundErrorStats{1, 3.0, 2.0, 0.5});
  CHECK(theorem_bound_terms(r, cfg).beta_sum == 0.0);
  std::vector<RoundErrorStats> one = {{2, 1.0, 0.0, 1.0}};
  auto t = theorem_bound_terms(one, cfg);
  CHECK(t.beta_sum == doctest::Approx(std::sqrt(0.5)));
  CHECK(t.beta.size() == 1);
}

TEST_CASE("adaptive depth minimizes the per-round error term") {
  SirConfig cfg = SirConfig::from_sir_db(-23.0, 10, 0.2, 200);
  Rng rng(34);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int t = 0; t < 50; ++t) {
    GsiEstimate gsi;
    gsi.alpha_sq = u(rng);
    gsi.v_sq = u(rng) / 10.0;
    std::size_t a = 1 + t % 10;
    auto g = adaptive_depth(gsi, a, cfg).g;
    RoundErrorStats best{g, gsi.alpha_sq, gsi.v_sq, 1.0 / (a * a)};
    double at_best = beta_round(best, cfg);
    for (std::size_t other = 1; other <= cfg.d; ++other) {
      RoundErrorStats r = best;
      r.g = other;
      CHECK(at_best <= beta_round(r, cfg) * (1 + 1e-12));
    }
  }
}

TEST_CASE("binomial inverse moments") {
  auto exact = binomial_inverse_moments(10, 0.82);
  auto ref = oracle::binomial_moments(10, 0.82);
  CHECK(exact.inv_k == doctest::Approx(ref.inv_k).epsilon(1e-12));
  CHECK(exact.inv_k_sq == doctest::Approx(ref.inv_k_sq).epsilon(1e-12));
  CHECK(exact.p_zero == doctest::Approx(ref.p_zero).epsilon(1e-12));
  CHECK(exact.inv_k <= 2.0 / (10 * 0.82));
  CHECK(exact.inv_k_sq <= 6.0 / (100 * 0.82 * 0.82));
  Rng rng(35);
  auto mc = sampled_inverse_moments(10, 0.82, 100000, rng);
  CHECK(mc.inv_k == doctest::Approx(exact.inv_k).epsilon(0.01));
  auto single = binomial_inverse_moments(1, 1.0);
  CHECK(single.inv_k == 1.0);
}

TEST_CASE("gamma bound check") {
  std::vector<std::vector<GradientVector>> zero = {{GradientVector(4), GradientVector(4)}};
  auto z = gamma_bound_check(zero, GradientVector(4), 0.0, 10, 0.8);
  CHECK(z.gamma == 0.0);
  CHECK(z.mean_alpha_sq == 0.0);
  CHECK(z.mean_v_sq == 0.0);
  CHECK(z.alpha_ok);
  CHECK(z.v_ok);

  const std::size_t d = 50, k = 10;
  Rng rng(36);
  std::normal_distribution<double> n01;
  std::vector<std::vector<GradientVector>> sets;
  for (int t = 0; t < 200; ++t) {
    std::vector<GradientVector> s(k, GradientVector(d));
    for (auto& g : s)
      for (double& v : g.values) v = n01(rng);
    sets.push_back(std::move(s));
  }
  auto r = gamma_bound_check(sets, GradientVector(d), static_cast<double>(d), k, 0.8);
  CHECK(r.mean_v_sq == doctest::Approx(1.0).epsilon(0.05));
  CHECK(r.alpha_ok);
  CHECK(r.v_ok);
  CHECK(r.precondition_ok);
  CHECK_FALSE(gamma_bound_check(sets, GradientVector(d), double(d), 1, 0.8).precondition_ok);
}

TEST_CASE("empirical mse matches the exact active-set expectation") {
  const std::size_t k = 6, d = 24;
  SirConfig cfg = SirConfig::from_sir_db(-15.0, k, 0.2, d);
  Rng rng(37);
  std::normal_distribution<double> n01;
  std::vector<GradientVector> grads(k, GradientVector(d));
  for (auto& g : grads)
    for (double& v : g.values) v = 0.2 + n01(rng);
  auto exact = oracle::enumerate_active_sets(grads, cfg.xi_a);
  MseExperiment ex{3, 0, 0.2, 20000};
  auto e = empirical_aircomp_mse(grads, cfg, ex, 9);
  double gamma = static_cast<double>(d / 3) / d;
  auto cf = closed_form_mse(gamma, 3, cfg, exact.alpha_sq, exact.v_sq_inv_k_sq, 1.0);
  CHECK(e.total == doctest::Approx(cf.total).epsilon(0.05));
  CHECK(e.mean_gamma == doctest::Approx(gamma));
}
