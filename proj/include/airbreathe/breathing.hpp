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

// Breathing-depth control: the fixed closed-form depth (no GSI/CSI) and the
// per-round adaptive depth driven by gradient-state feedback.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "airbreathe/signal_chain.hpp"

namespace airbreathe {

struct SirConfig {
  double p0 = 1.0;   // alignment (receive) power per device
  double p_i = 1.0;  // interference power
  std::size_t k = 1;  // devices
  double xi_a = 1.0;  // activation probability
  std::size_t d = 1;  // model dimension

  // P_I = p_i, P0 = p_i * 10^(sir_db/10), xi_a = e^{-g_th}.
  static SirConfig from_sir_db(double sir_db, std::size_t devices, double g_th, std::size_t dim,
                               double p_i = 1.0);
  // Throws ConfigError when a field is out of range. p_i == 0 is accepted.
  void validate() const;
};

// What one device feeds back to the server.
struct DeviceFeedback {
  double norm_sq = 0.0;     // ||g_k||^2
  double local_var = 0.0;   // (1/D) sum_d (g_kd - mean_k)^2
  double local_mean = 0.0;  // (1/D) sum_d g_kd
};

DeviceFeedback device_feedback(const GradientVector& g);

struct GsiEstimate {
  double alpha_sq = 0.0;  // mean of ||g_k||^2 over active devices
  double v_sq = 0.0;      // mean of local variances
  double mean = 0.0;      // mean of local coordinate means; shared M(n)
  std::vector<DeviceFeedback> per_device;
};

// Throws RoundSkipped on an empty active set.
GsiEstimate estimate_gsi(std::span<const DeviceFeedback> feedback);
GsiEstimate estimate_gsi(std::span<const GradientVector> active_gradients);

enum class DepthRegime { kClipLow, kInterior, kClipHigh };

std::string_view to_string(DepthRegime r);

struct DepthDecision {
  std::size_t g = 1;
  double relaxed_x = 0.0;
  DepthRegime regime = DepthRegime::kClipLow;
  // Set when alpha^2 == 0 forced the upper clip.
  bool degenerate_gsi = false;
};

// sqrt(1 - 1/G + 6 P_I / (G^2 K^2 xi_a^2 P0))
double beta_fixed(std::size_t g, const SirConfig& cfg);

// Closed-form fixed depth from x* = 12 P_I / (P0 K^2 xi_a^2).
DepthDecision fixed_depth(const SirConfig& cfg);

// Exhaustive scan of beta_fixed over {1..D}; ties go to the smaller depth.
DepthDecision scan_fixed_depth(const SirConfig& cfg);

// (1 - 1/G) alpha^2 + D P_I V^2 / (G^2 P0 |K|^2)
double beta_adaptive(std::size_t g, const GsiEstimate& gsi, std::size_t active_count,
                     const SirConfig& cfg);

// Adaptive depth from x_n* = 2 P_I D V^2 / (P0 |K|^2 alpha^2).
DepthDecision adaptive_depth(const GsiEstimate& gsi, std::size_t active_count,
                             const SirConfig& cfg);

}  // namespace airbreathe
