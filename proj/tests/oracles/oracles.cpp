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

#include "oracles/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace airbreathe::oracle {

std::size_t brute_force_argmin(const std::function<double(std::size_t)>& f, std::size_t d) {
  std::size_t best = 1;
  double best_v = f(1);
  for (std::size_t g = 2; g <= d; ++g) {
    double v = f(g);
    if (v < best_v) {
      best_v = v;
      best = g;
    }
  }
  return best;
}

double exhaustive_pruning_error(std::span<const double> x, std::size_t s) {
  const std::size_t d = x.size();
  std::vector<bool> pick(d, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(s), true);
  GradientVector g(std::vector<double>(x.begin(), x.end()));
  double total = 0.0;
  std::size_t count = 0;
  // prev_permutation over a sorted-descending bool vector walks every subset once.
  do {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d; ++i)
      if (pick[i]) idx.push_back(i);
    PruningMask mask(idx, d);
    GradientVector back = zero_pad(prune(g, mask).values, mask);
    double e = 0.0;
    for (std::size_t i = 0; i < d; ++i) e += (x[i] - back.values[i]) * (x[i] - back.values[i]);
    total += e;
    ++count;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return total / static_cast<double>(count);
}

BinomialMoments binomial_moments(std::size_t k, double xi) {
  BinomialMoments m;
  std::vector<double> p(k + 1, 0.0);
  if (xi >= 1.0) {
    p[k] = 1.0;
  } else {
    p[0] = std::pow(1.0 - xi, static_cast<double>(k));
    double r = xi / (1.0 - xi);
    for (std::size_t j = 0; j < k; ++j) {
      p[j + 1] = p[j] * static_cast<double>(k - j) / static_cast<double>(j + 1) * r;
    }
  }
  m.p_zero = p[0];
  double mass = 0.0;
  for (std::size_t j = 0; j <= k; ++j) {
    double x = static_cast<double>(j);
    m.mean += p[j] * x;
    m.var += p[j] * x * x;
    if (j == 0) continue;
    mass += p[j];
    m.inv_k += p[j] / x;
    m.inv_k_sq += p[j] / (x * x);
  }
  m.var -= m.mean * m.mean;
  if (mass > 0) {
    m.inv_k /= mass;
    m.inv_k_sq /= mass;
  }
  return m;
}

ActiveSetExpectation enumerate_active_sets(std::span<const GradientVector> gradients, double xi) {
  const std::size_t k = gradients.size();
  const std::size_t d = gradients.front().dim();
  std::vector<double> local_var(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& v = gradients[i].values;
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(d);
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    local_var[i] = s / static_cast<double>(d);
  }
  ActiveSetExpectation out;
  double mass = 0.0;
  std::vector<double> avg(d);
  for (std::size_t bits = 1; bits < (std::size_t{1} << k); ++bits) {
    std::size_t n = static_cast<std::size_t>(__builtin_popcountll(bits));
    double p = std::pow(xi, static_cast<double>(n)) * std::pow(1.0 - xi, static_cast<double>(k - n));
    std::fill(avg.begin(), avg.end(), 0.0);
    double vsum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!(bits >> i & 1)) continue;
      for (std::size_t c = 0; c < d; ++c) avg[c] += gradients[i].values[c];
      vsum += local_var[i];
    }
    double a2 = 0.0;
    for (double v : avg) a2 += (v / static_cast<double>(n)) * (v / static_cast<double>(n));
    double nn = static_cast<double>(n);
    out.alpha_sq += p * a2;
    out.v_sq_inv_k_sq += p * (vsum / nn) / (nn * nn);
    mass += p;
  }
  out.alpha_sq /= mass;
  out.v_sq_inv_k_sq /= mass;
  return out;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace

double inverse_gain_expectation(double g_th) {
  // Substitute x = g_th + t/(1-t) to map [g_th, inf) onto [0, 1).
  auto f = [g_th](double t) {
    if (t >= 1.0) return 0.0;
    double x = g_th + t / (1.0 - t);
    double jac = 1.0 / ((1.0 - t) * (1.0 - t));
    return std::exp(-(x - g_th)) / x * jac;
  };
  double a = 0.0, b = 1.0;
  double fa = f(a), fb = f(b), fm = f(0.5);
  double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, 1e-12, 40);
}

double directional_derivative(const Model& m, std::span<const double> w, std::span<const double> v,
                              const Dataset& data, std::span<const std::size_t> batch, double h) {
  std::vector<double> plus(w.begin(), w.end()), minus(w.begin(), w.end());
  for (std::size_t i = 0; i < w.size(); ++i) {
    plus[i] += h * v[i];
    minus[i] -= h * v[i];
  }
  return (m.loss_grad(plus, data, batch, {}) - m.loss_grad(minus, data, batch, {})) / (2.0 * h);
}

}  // namespace airbreathe::oracle
