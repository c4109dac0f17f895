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

#include "airbreathe/breathing.hpp"

#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>

#include "airbreathe/channel.hpp"
#include "airbreathe/error.hpp"

namespace airbreathe {

SirConfig SirConfig::from_sir_db(double sir_db, std::size_t devices, double g_th, std::size_t dim,
                                 double p_i) {
  SirConfig cfg;
  cfg.p_i = p_i;
  cfg.p0 = p_i * std::pow(10.0, sir_db / 10.0);
  cfg.k = devices;
  cfg.xi_a = activation_probability(g_th);
  cfg.d = dim;
  if (p_i == 0.0) cfg.p0 = std::pow(10.0, sir_db / 10.0);
  return cfg;
}

void SirConfig::validate() const {
  if (!(p0 > 0.0)) throw ConfigError("SIR config: P0 must be positive");
  if (!(p_i >= 0.0)) throw ConfigError("SIR config: P_I must be >= 0");
  if (k == 0) throw ConfigError("SIR config: need at least one device");
  if (!(xi_a > 0.0 && xi_a <= 1.0)) throw ConfigError("SIR config: xi_a must lie in (0, 1]");
  if (d == 0) throw ConfigError("SIR config: model dimension must be positive");
}

DeviceFeedback device_feedback(const GradientVector& g) {
  DeviceFeedback fb;
  const std::size_t n = g.dim();
  if (n == 0) return fb;
  double sum = 0.0;
  for (double v : g.values) {
    sum += v;
    fb.norm_sq += v * v;
  }
  fb.local_mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (double v : g.values) {
    const double c = v - fb.local_mean;
    var += c * c;
  }
  fb.local_var = var / static_cast<double>(n);
  return fb;
}

GsiEstimate estimate_gsi(std::span<const DeviceFeedback> feedback) {
  if (feedback.empty()) throw RoundSkipped("no active device fed back gradient statistics");
  GsiEstimate gsi;
  gsi.per_device.assign(feedback.begin(), feedback.end());
  for (const auto& fb : feedback) {
    gsi.alpha_sq += fb.norm_sq;
    gsi.v_sq += fb.local_var;
    gsi.mean += fb.local_mean;
  }
  const double n = static_cast<double>(feedback.size());
  gsi.alpha_sq /= n;
  gsi.v_sq /= n;
  gsi.mean /= n;
  return gsi;
}

GsiEstimate estimate_gsi(std::span<const GradientVector> active_gradients) {
  std::vector<DeviceFeedback> fb;
  fb.reserve(active_gradients.size());
  for (const auto& g : active_gradients) fb.push_back(device_feedback(g));
  return estimate_gsi(fb);
}

std::string_view to_string(DepthRegime r) {
  switch (r) {
    case DepthRegime::kClipLow:
      return "clip_low";
    case DepthRegime::kInterior:
      return "interior";
    case DepthRegime::kClipHigh:
      return "clip_high";
  }
  return "unknown";
}

namespace {

// Clip to [1, D] and pick between floor and ceil by the objective.
DepthDecision clip_and_round(double x, std::size_t dim,
                             const std::function<double(std::size_t)>& objective) {
  DepthDecision out;
  out.relaxed_x = x;
  if (x < 1.0) {
    out.g = 1;
    out.regime = DepthRegime::kClipLow;
  } else if (x > static_cast<double>(dim)) {
    out.g = dim;
    out.regime = DepthRegime::kClipHigh;
  } else {
    const auto lo = static_cast<std::size_t>(std::floor(x));
    const auto hi = static_cast<std::size_t>(std::ceil(x));
    out.g = objective(lo) <= objective(hi) ? lo : hi;
    out.regime = DepthRegime::kInterior;
  }
  return out;
}

}  // namespace

double beta_fixed(std::size_t g, const SirConfig& cfg) {
  if (g == 0) throw ConfigError("breathing depth must be >= 1");
  const double G = static_cast<double>(g);
  const double kx = static_cast<double>(cfg.k) * cfg.xi_a;
  const double v = 1.0 - 1.0 / G + 6.0 * cfg.p_i / (G * G * kx * kx * cfg.p0);
  return std::sqrt(std::max(v, 0.0));
}

DepthDecision fixed_depth(const SirConfig& cfg) {
  cfg.validate();
  const double kx = static_cast<double>(cfg.k) * cfg.xi_a;
  const double x = 12.0 * cfg.p_i / (cfg.p0 * kx * kx);
  return clip_and_round(x, cfg.d, [&](std::size_t g) { return beta_fixed(g, cfg); });
}

DepthDecision scan_fixed_depth(const SirConfig& cfg) {
  cfg.validate();
  DepthDecision out;
  const double kx = static_cast<double>(cfg.k) * cfg.xi_a;
  out.relaxed_x = 12.0 * cfg.p_i / (cfg.p0 * kx * kx);
  double best = beta_fixed(1, cfg);
  out.g = 1;
  for (std::size_t g = 2; g <= cfg.d; ++g) {
    const double b = beta_fixed(g, cfg);
    if (b < best) {
      best = b;
      out.g = g;
    }
  }
  out.regime = out.g == 1 ? DepthRegime::kClipLow
               : out.g == cfg.d ? DepthRegime::kClipHigh
                                : DepthRegime::kInterior;
  return out;
}

double beta_adaptive(std::size_t g, const GsiEstimate& gsi, std::size_t active_count,
                     const SirConfig& cfg) {
  if (g == 0) throw ConfigError("breathing depth must be >= 1");
  if (active_count == 0) throw RoundSkipped("no active device");
  const double G = static_cast<double>(g);
  const double kk = static_cast<double>(active_count);
  return (1.0 - 1.0 / G) * gsi.alpha_sq +
         static_cast<double>(cfg.d) * cfg.p_i * gsi.v_sq / (G * G * cfg.p0 * kk * kk);
}

DepthDecision adaptive_depth(const GsiEstimate& gsi, std::size_t active_count,
                             const SirConfig& cfg) {
  cfg.validate();
  if (active_count == 0) throw RoundSkipped("no active device");
  if (!(gsi.alpha_sq > 0.0)) {
    DepthDecision out;
    out.g = cfg.d;
    out.relaxed_x = std::numeric_limits<double>::infinity();
    out.regime = DepthRegime::kClipHigh;
    out.degenerate_gsi = true;
    return out;
  }
  const double kk = static_cast<double>(active_count);
  const double x = 2.0 * cfg.p_i * static_cast<double>(cfg.d) * gsi.v_sq /
                   (cfg.p0 * kk * kk * gsi.alpha_sq);
  return clip_and_round(x, cfg.d,
                        [&](std::size_t g) { return beta_adaptive(g, gsi, active_count, cfg); });
}

}  // namespace airbreathe
