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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "airbreathe/breathing.hpp"
#include "airbreathe/rng.hpp"
#include "airbreathe/signal_chain.hpp"

namespace airbreathe {

// (1 - gamma) * D * sigma^2 / |K| for i.i.d. N(0, sigma^2) device gradients.
double generic_pruning_mse(double sigma_sq, std::size_t d, double gamma, std::size_t k_active);

struct MseBreakdown {
  double pruning_term = 0.0;
  double interference_term = 0.0;
  double total = 0.0;
};

// pruning = (1-gamma) alpha^2; interference = gamma D P_I v^2 E[1/|K|^2] / (G P0).
MseBreakdown closed_form_mse(double gamma, std::size_t g_depth, const SirConfig& cfg,
                             double alpha_sq, double v_sq, double inv_k_sq);

enum class PropagationForm { kMainText, kAppendix };

// kMainText: (2 - xi) sigma_g^2 / (K xi) + sqrt(MSE).
// kAppendix: sqrt((2 - xi) / (K xi)) sigma_g + sqrt(MSE).
double propagation_loss(double mse_total, std::size_t k, double xi_a, double sigma_g_sq,
                        PropagationForm form = PropagationForm::kMainText);

struct ConvergenceParams {
  double c = 1.0;
  double epsilon = 1.0;
  double g_bound_sq = 1.0;
  double sigma_g_sq = 0.0;
  double zeta_sq = 0.0;
  double eta = 0.1;

  // 2 eta c eps - eta^2 G^2
  double denominator() const;
  double h_lipschitz() const;
  // eta < 2 c eps / G^2, the condition that keeps the denominator positive.
  bool learning_rate_ok() const;
  void validate() const;
};

double rate_supermartingale(double dist_sq, const ConvergenceParams& p, std::size_t n);
double rate_supermartingale(std::span<const double> w, std::span<const double> w_star,
                            const ConvergenceParams& p, std::size_t n);

// U_n = W_n - eta H sum_{i<n} u(i)
double shifted_supermartingale(double w_n, const ConvergenceParams& p, double u_prefix_sum);

// eta < 2 sqrt(eps) (c sqrt(eps) N - sum u) / (N G^2)
bool convergence_lr_condition(const ConvergenceParams& p, std::size_t rounds, double u_sum);

struct FailureBound {
  double raw = 0.0;
  double clamped = 1.0;
  bool vacuous = true;
  bool lr_condition = false;
};

FailureBound failure_bound(const ConvergenceParams& p, std::span<const double> u_series,
                           double w0_dist_sq);

struct RoundErrorStats {
  std::size_t g = 1;
  double alpha_sq = 0.0;
  double v_sq = 0.0;
  double inv_k_sq = 0.0;  // 1/|K|^2 or its expectation
};

struct TheoremTerms {
  std::vector<double> beta;  // per round
  double beta_sum = 0.0;     // sum of sqrt(beta_n)
};

double beta_round(const RoundErrorStats& r, const SirConfig& cfg);
TheoremTerms theorem_bound_terms(std::span<const RoundErrorStats> rounds, const SirConfig& cfg);

// Failure bound after substituting G_n = 1/gamma_n.
FailureBound theorem_failure_bound(const ConvergenceParams& p, const TheoremTerms& terms,
                                   std::size_t k, double xi_a, double w0_dist_sq);

struct GammaBoundReport {
  double gamma = 0.0;
  double mean_alpha_sq = 0.0;
  double mean_v_sq = 0.0;
  bool alpha_ok = true;  // E[alpha^2] <= D Gamma
  bool v_ok = true;      // E[V^2] <= Gamma
  bool precondition_ok = true;  // K xi >= 2
};

// Each element of active_sets holds the gradients of one round's active devices.
GammaBoundReport gamma_bound_check(std::span<const std::vector<GradientVector>> active_sets,
                                   const GradientVector& true_gradient, double sigma_g_sq,
                                   std::size_t k, double xi_a);

struct InverseMoments {
  double inv_k = 0.0;     // E[1/|K| | |K| >= 1]
  double inv_k_sq = 0.0;  // E[1/|K|^2 | |K| >= 1]
  double p_zero = 0.0;    // Pr{|K| = 0}
};

// Exact binomial sums.
InverseMoments binomial_inverse_moments(std::size_t k, double xi_a);
InverseMoments sampled_inverse_moments(std::size_t k, double xi_a, std::size_t trials, Rng& rng);

struct EmpiricalMse {
  double total = 0.0;
  double mean_alpha_sq = 0.0;       // E[alpha^2]
  double mean_v_sq_inv_k_sq = 0.0;  // E[V^2/|K|^2]
  double mean_gamma = 0.0;
  std::size_t trials = 0;
  std::size_t skipped = 0;  // |K| = 0 draws
};

struct MseExperiment {
  std::size_t depth = 1;
  // 0 means floor(D / depth) coordinates survive; otherwise this many.
  std::size_t mask_size = 0;
  double g_th = 0.2;
  std::size_t trials = 10000;
};

// Monte-Carlo AirComp error over masks, PN chips, fading and interference
// with device gradients held fixed. The target is the active-set average.
EmpiricalMse empirical_aircomp_mse(std::span<const GradientVector> device_gradients,
                                   const SirConfig& cfg, const MseExperiment& ex,
                                   std::uint64_t seed);

}  // namespace airbreathe
