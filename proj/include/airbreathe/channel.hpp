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

// Block Rayleigh fading, truncated channel inversion, the long-term power
// audit and chip-level over-the-air superposition with Gaussian interference.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "airbreathe/rng.hpp"
#include "airbreathe/signal_chain.hpp"

namespace airbreathe {

struct ChannelRealization {
  std::vector<std::complex<double>> h;
  // Complex inversion amplitude sqrt(P0)/h for active devices, 0 otherwise.
  // |p|^2 is the transmit power scaling.
  std::vector<std::complex<double>> p;
  std::vector<bool> active;

  std::size_t num_devices() const { return h.size(); }
  std::size_t active_count() const;
  std::vector<std::size_t> active_indices() const;
};

// Per-chip complex Gaussian interference with total variance 2 * power.
// A power of exactly 0 disables interference (ablation runs only).
struct InterferenceProfile {
  double power = 1.0;
};

class PowerLedger {
 public:
  explicit PowerLedger(std::size_t num_devices = 0, double budget = 0.0);

  void add(std::size_t device, double energy);
  // Commutative merge of trial-parallel ledgers.
  void merge(const PowerLedger& other);
  void end_round() { ++rounds_; }

  std::size_t num_devices() const { return energy_.size(); }
  std::size_t rounds() const { return rounds_; }
  double budget() const { return budget_; }
  double cumulative(std::size_t device) const { return energy_.at(device); }
  const std::vector<double>& energy() const { return energy_; }

 private:
  std::vector<double> energy_;
  double budget_;
  std::size_t rounds_ = 0;
};

struct PowerAudit {
  std::vector<double> energy;
  // energy / budget; empty when no budget is configured.
  std::vector<double> budget_fraction;
  double mean_energy = 0.0;
  double mean_energy_per_round = 0.0;
  std::size_t devices_over_budget = 0;
};

// e^{-g_th}: probability that a unit-variance Rayleigh gain clears the threshold.
double activation_probability(double g_th);

ChannelRealization draw_channels(std::size_t num_devices, double g_th, double p0, Rng& rng);

// frame[i] = sum_{k active} h_k p_k chips_k[i] + z[i]. Chip vectors of inactive
// devices are ignored and may be empty. When `ledger` is given, each active
// device is charged chips.size() * |p_k|^2; closing the round is left to the caller.
ChipFrame transmit_round(std::span<const std::vector<double>> per_device_chips,
                         const ChannelRealization& chan, const InterferenceProfile& intf,
                         Rng& rng, PowerLedger* ledger = nullptr);

// Reporting only; never gates transmission.
PowerAudit audit_power(const PowerLedger& ledger);

}  // namespace airbreathe
