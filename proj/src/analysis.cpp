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

#include "airbreathe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "airbreathe/channel.hpp"
#include "airbreathe/error.hpp"
#include "airbreathe/learning.hpp"

namespace airbreathe {

double generic_pruning_mse(double sigma_sq, std::size_t d, double gamma, std::size_t k_active) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (k_active == 0) throw ConfigError("need at least one active device");
  return (1.0 - gamma) * static_cast<double>(d) * sigma_sq / static_cast<double>(k_active);
}

MseBreakdown closed_form_mse(double gamma, std::size_t g_depth, const SirConfig& cfg,
                             double alpha_sq, double v_sq, double inv_k_sq) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (g_depth == 0) throw ConfigError("depth must be >= 1");
  MseBreakdown m;
  m.pruning_term = (1.0 - gamma) * alpha_sq;
  m.interference_term = gamma * static_cast<double>(cfg.d) * cfg.p_i * v_sq * inv_k_sq /
                        (static_cast<double>(g_depth) * cfg.p0);
  m.total = m.pruning_term + m.interference_term;
  return m;
}

double propagation_loss(double mse_total, std::size_t k, double xi_a, double sigma_g_sq,
                        PropagationForm form) {
  if (k == 0 || !(xi_a > 0.0 && xi_a <= 1.0)) throw ConfigError("bad K or activation probability");
  double ratio = (2.0 - xi_a) / (static_cast<double>(k) * xi_a);
  double channel = form == PropagationForm::kMainText ? ratio * sigma_g_sq
                                                       : std::sqrt(ratio * sigma_g_sq);
  return channel + std::sqrt(std::max(mse_total, 0.0));
}

double ConvergenceParams::denominator() const {
  return 2.0 * eta * c * epsilon - eta * eta * g_bound_sq;
}

double ConvergenceParams::h_lipschitz() const {
  return 2.0 * std::sqrt(epsilon) / denominator();
}

bool ConvergenceParams::learning_rate_ok() const { return eta < 2.0 * c * epsilon / g_bound_sq; }

void ConvergenceParams::validate() const {
  if (!(c > 0 && epsilon > 0 && g_bound_sq > 0 && eta > 0)) {
    throw ConfigError("convergence constants must be positive");
  }
  if (sigma_g_sq < 0 || zeta_sq < 0) throw ConfigError("variances must be nonnegative");
  if (!learning_rate_ok()) throw ConfigError("learning rate must satisfy eta < 2 c eps / G^2");
}

double rate_supermartingale(double dist_sq, const ConvergenceParams& p, std::size_t n) {
  return p.epsilon / p.denominator() * std::log(std::numbers::e * dist_sq / p.epsilon) +
         static_cast<double>(n);
}

double rate_supermartingale(std::span<const double> w, std::span<const double> w_star,
                            const ConvergenceParams& p, std::size_t n) {
  if (w.size() != w_star.size()) throw ConfigError("dimension mismatch");
  double d2 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) d2 += (w[i] - w_star[i]) * (w[i] - w_star[i]);
  return rate_supermartingale(d2, p, n);
}

double shifted_supermartingale(double w_n, const ConvergenceParams& p, double u_prefix_sum) {
  return w_n - p.eta * p.h_lipschitz() * u_prefix_sum;
}

bool convergence_lr_condition(const ConvergenceParams& p, std::size_t rounds, double u_sum) {
  double n = static_cast<double>(rounds);
  double se = std::sqrt(p.epsilon);
  return p.eta < 2.0 * se * (p.c * se * n - u_sum) / (n * p.g_bound_sq);
}

namespace {

FailureBound finish_bound(double numer, double denom, bool lr_ok) {
  FailureBound b;
  b.lr_condition = lr_ok;
  if (!(denom > 0.0)) {
    b.vacuous = true;
    b.raw = std::numeric_limits<double>::infinity();
    b.clamped = 1.0;
    return b;
  }
  b.raw = numer / denom;
  b.clamped = std::clamp(b.raw, 0.0, 1.0);
  b.vacuous = b.raw >= 1.0;
  return b;
}

}  // namespace

FailureBound failure_bound(const ConvergenceParams& p, std::span<const double> u_series,
                           double w0_dist_sq) {
  double u_sum = 0.0;
  for (double u : u_series) u_sum += u;
  double n = static_cast<double>(u_series.size());
  double numer = p.epsilon * std::log(std::numbers::e * w0_dist_sq / p.epsilon);
  double denom = p.denominator() * n - 2.0 * p.eta * std::sqrt(p.epsilon) * u_sum;
  return finish_bound(numer, denom, convergence_lr_condition(p, u_series.size(), u_sum));
}

double beta_round(const RoundErrorStats& r, const SirConfig& cfg) {
  if (r.g == 0) throw ConfigError("depth must be >= 1");
  double g = static_cast<double>(r.g);
  return (1.0 - 1.0 / g) * r.alpha_sq +
         static_cast<double>(cfg.d) * cfg.p_i * r.v_sq * r.inv_k_sq / (g * g * cfg.p0);
}

TheoremTerms theorem_bound_terms(std::span<const RoundErrorStats> rounds, const SirConfig& cfg) {
  TheoremTerms t;
  t.beta.reserve(rounds.size());
  for (const auto& r : rounds) {
    double b = beta_round(r, cfg);
    t.beta.push_back(b);
    t.beta_sum += std::sqrt(b);
  }
  return t;
}

FailureBound theorem_failure_bound(const ConvergenceParams& p, const TheoremTerms& terms,
                                   std::size_t k, double xi_a, double w0_dist_sq) {
  double n = static_cast<double>(terms.beta.size());
  double se = std::sqrt(p.epsilon);
  double chan = 2.0 * std::sqrt((2.0 - xi_a) * p.epsilon / (static_cast<double>(k) * xi_a)) *
                std::sqrt(p.sigma_g_sq);
  double numer = p.epsilon * std::log(std::numbers::e * w0_dist_sq / p.epsilon);
  double denom = (2.0 * p.c * p.epsilon - p.eta * p.g_bound_sq - chan) * p.eta * n -
                 2.0 * p.eta * se * terms.beta_sum;
  // The learning-rate premise uses u = channel part + sqrt(beta) per round.
  double u_sum = terms.beta_sum + n * chan / (2.0 * se);
  return finish_bound(numer, denom, convergence_lr_condition(p, terms.beta.size(), u_sum));
}

GammaBoundReport gamma_bound_check(std::span<const std::vector<GradientVector>> active_sets,
                                   const GradientVector& true_gradient, double sigma_g_sq,
                                   std::size_t k, double xi_a) {
  GammaBoundReport r;
  double d = static_cast<double>(true_gradient.dim());
  r.gamma = d > 0 ? (true_gradient.norm_sq() + sigma_g_sq) / d : 0.0;
  r.precondition_ok = static_cast<double>(k) * xi_a >= 2.0;
  std::size_t used = 0;
  for (const auto& set : active_sets) {
    if (set.empty()) continue;
    GsiEstimate gsi = estimate_gsi(std::span<const GradientVector>(set));
    GradientVector avg = ideal_aggregate(set);
    r.mean_alpha_sq += avg.norm_sq();
    r.mean_v_sq += gsi.v_sq;
    ++used;
  }
  if (used > 0) {
    r.mean_alpha_sq /= static_cast<double>(used);
    r.mean_v_sq /= static_cast<double>(used);
  }
  r.alpha_ok = r.mean_alpha_sq <= d * r.gamma;
  r.v_ok = r.mean_v_sq <= r.gamma;
  return r;
}

InverseMoments binomial_inverse_moments(std::size_t k, double xi_a) {
  InverseMoments m;
  // log-space binomial pmf
  std::vector<double> pmf(k + 1);
  for (std::size_t j = 0; j <= k; ++j) {
    double lc = std::lgamma(static_cast<double>(k) + 1) - std::lgamma(static_cast<double>(j) + 1) -
                std::lgamma(static_cast<double>(k - j) + 1);
    double lp = (j > 0 ? static_cast<double>(j) * std::log(xi_a) : 0.0) +
                (k - j > 0 ? static_cast<double>(k - j) * std::log1p(-xi_a) : 0.0);
    pmf[j] = (xi_a >= 1.0) ? (j == k ? 1.0 : 0.0) : std::exp(lc + lp);
  }
  m.p_zero = pmf[0];
  double mass = 1.0 - m.p_zero;
  if (mass <= 0) return m;
  for (std::size_t j = 1; j <= k; ++j) {
    double x = static_cast<double>(j);
    m.inv_k += pmf[j] / x;
    m.inv_k_sq += pmf[j] / (x * x);
  }
  m.inv_k /= mass;
  m.inv_k_sq /= mass;
  return m;
}

InverseMoments sampled_inverse_moments(std::size_t k, double xi_a, std::size_t trials, Rng& rng) {
  InverseMoments m;
  double g_th = -std::log(xi_a);
  std::size_t zero = 0, used = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    ChannelRealization ch = draw_channels(k, g_th, 1.0, rng);
    std::size_t a = ch.active_count();
    if (a == 0) {
      ++zero;
      continue;
    }
    double x = static_cast<double>(a);
    m.inv_k += 1.0 / x;
    m.inv_k_sq += 1.0 / (x * x);
    ++used;
  }
  if (used > 0) {
    m.inv_k /= static_cast<double>(used);
    m.inv_k_sq /= static_cast<double>(used);
  }
  m.p_zero = trials ? static_cast<double>(zero) / static_cast<double>(trials) : 0.0;
  return m;
}

EmpiricalMse empirical_aircomp_mse(std::span<const GradientVector> device_gradients,
                                   const SirConfig& cfg, const MseExperiment& ex,
                                   std::uint64_t seed) {
  if (device_gradients.empty()) throw ConfigError("no device gradients");
  if (ex.depth == 0) throw ConfigError("depth must be >= 1");
  std::size_t d = device_gradients.front().dim();
  PrunableSet all = PrunableSet::all(d);
  std::size_t s = ex.mask_size ? std::min(ex.mask_size, d) : all.mask_size_for_depth(ex.depth);
  InterferenceProfile intf{cfg.p_i};

  EmpiricalMse out;
  Rng chan_rng = make_stream(seed, Stream::kChannel);
  Rng mask_rng = make_stream(seed, Stream::kMask);
  Rng intf_rng = make_stream(seed, Stream::kInterference);
  std::vector<std::vector<double>> chips(device_gradients.size());
  std::vector<GradientVector> active;
  for (std::size_t t = 0; t < ex.trials; ++t) {
    ChannelRealization ch = draw_channels(device_gradients.size(), ex.g_th, cfg.p0, chan_rng);
    std::size_t a = ch.active_count();
    if (a == 0) {
      ++out.skipped;
      continue;
    }
    active.clear();
    for (std::size_t k : ch.active_indices()) active.push_back(device_gradients[k]);
    GsiEstimate gsi = estimate_gsi(std::span<const GradientVector>(active));
    NormalizationParams norm{gsi.mean, std::sqrt(gsi.v_sq)};
    if (norm.std <= kSigmaFloor) norm = {0.0, 1.0};

    PruningMask mask = all.draw(s, mask_rng);
    PNSequenceSet pn = PNSequenceSet::generate(s, ex.depth, derive_seed(seed, Stream::kPn, t));
    for (std::size_t k = 0; k < device_gradients.size(); ++k) {
      if (ch.active[k]) chips[k] = transmit_chain(device_gradients[k], mask, norm, pn);
      else chips[k].clear();
    }
    ChipFrame frame = transmit_round(chips, ch, intf, intf_rng);
    GradientVector y = receive_chain(frame, pn, norm, a, cfg.p0, mask);

    GradientVector target(d);
    for (const auto& g : active) {
      for (std::size_t i = 0; i < d; ++i) target.values[i] += g.values[i];
    }
    double err = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      target.values[i] /= static_cast<double>(a);
      double e = y.values[i] - target.values[i];
      err += e * e;
    }
    out.total += err;
    out.mean_alpha_sq += target.norm_sq();
    out.mean_v_sq_inv_k_sq += norm.std * norm.std / (static_cast<double>(a) * static_cast<double>(a));
    out.mean_gamma += static_cast<double>(s) / static_cast<double>(d);
    ++out.trials;
  }
  if (out.trials > 0) {
    double n = static_cast<double>(out.trials);
    out.total /= n;
    out.mean_alpha_sq /= n;
    out.mean_v_sq_inv_k_sq /= n;
    out.mean_gamma /= n;
  }
  return out;
}

}  // namespace airbreathe
