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

#include "airbreathe/channel.hpp"

#include <cmath>
#include <string>

#include "airbreathe/error.hpp"

namespace airbreathe {

std::size_t ChannelRealization::active_count() const {
  std::size_t n = 0;
  for (bool a : active) n += a ? 1 : 0;
  return n;
}

std::vector<std::size_t> ChannelRealization::active_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < active.size(); ++k)
    if (active[k]) idx.push_back(k);
  return idx;
}

PowerLedger::PowerLedger(std::size_t num_devices, double budget)
    : energy_(num_devices, 0.0), budget_(budget) {}

void PowerLedger::add(std::size_t device, double energy) {
  if (energy < 0.0) throw ConfigError("negative energy charged to the power ledger");
  energy_.at(device) += energy;
}

void PowerLedger::merge(const PowerLedger& other) {
  if (other.energy_.size() != energy_.size())
    throw ConfigError("cannot merge power ledgers over different device counts");
  for (std::size_t k = 0; k < energy_.size(); ++k) energy_[k] += other.energy_[k];
  rounds_ += other.rounds_;
}

double activation_probability(double g_th) {
  if (g_th < 0.0) throw ConfigError("truncation threshold must be >= 0");
  return std::exp(-g_th);
}

ChannelRealization draw_channels(std::size_t num_devices, double g_th, double p0, Rng& rng) {
  if (g_th < 0.0) throw ConfigError("truncation threshold must be >= 0");
  if (!(p0 > 0.0)) throw ConfigError("alignment power P0 must be positive");
  // CN(0,1): real and imaginary parts each N(0, 1/2).
  std::normal_distribution<double> half(0.0, std::sqrt(0.5));
  const double amp = std::sqrt(p0);
  ChannelRealization chan;
  chan.h.resize(num_devices);
  chan.p.assign(num_devices, {0.0, 0.0});
  chan.active.assign(num_devices, false);
  for (std::size_t k = 0; k < num_devices; ++k) {
    const double re = half(rng);
    const double im = half(rng);
    chan.h[k] = {re, im};
    if (std::norm(chan.h[k]) >= g_th && std::norm(chan.h[k]) > 0.0) {
      chan.active[k] = true;
      chan.p[k] = amp / chan.h[k];
    }
  }
  return chan;
}

ChipFrame transmit_round(std::span<const std::vector<double>> per_device_chips,
                         const ChannelRealization& chan, const InterferenceProfile& intf,
                         Rng& rng, PowerLedger* ledger) {
  if (per_device_chips.size() != chan.num_devices())
    throw ConfigError("transmit_round: " + std::to_string(per_device_chips.size()) +
                      " chip vectors for " + std::to_string(chan.num_devices()) + " devices");
  if (intf.power < 0.0) throw ConfigError("interference power must be >= 0");

  std::size_t length = 0;
  bool have_length = false;
  for (std::size_t k = 0; k < chan.num_devices(); ++k) {
    const auto& c = per_device_chips[k];
    if (chan.active[k] || !c.empty()) {
      if (!have_length) {
        length = c.size();
        have_length = true;
      } else if (c.size() != length) {
        throw ConfigError("transmit_round: inconsistent chip vector lengths");
      }
    }
  }
  if (!have_length) throw ConfigError("transmit_round: no chip vector to size the frame");

  ChipFrame frame;
  frame.symbols.assign(length, {0.0, 0.0});
  for (std::size_t k = 0; k < chan.num_devices(); ++k) {
    if (!chan.active[k]) continue;
    const std::complex<double> gain = chan.h[k] * chan.p[k];
    const auto& c = per_device_chips[k];
    for (std::size_t i = 0; i < length; ++i) frame.symbols[i] += gain * c[i];
    if (ledger) ledger->add(k, static_cast<double>(length) * std::norm(chan.p[k]));
  }
  if (intf.power > 0.0) {
    std::normal_distribution<double> z(0.0, std::sqrt(intf.power));
    for (auto& s : frame.symbols) {
      const double re = z(rng);
      const double im = z(rng);
      s += std::complex<double>(re, im);
    }
  }
  return frame;
}

PowerAudit audit_power(const PowerLedger& ledger) {
  PowerAudit audit;
  audit.energy = ledger.energy();
  const std::size_t n = audit.energy.size();
  double total = 0.0;
  for (double e : audit.energy) total += e;
  if (n > 0) audit.mean_energy = total / static_cast<double>(n);
  if (ledger.rounds() > 0)
    audit.mean_energy_per_round = audit.mean_energy / static_cast<double>(ledger.rounds());
  if (ledger.budget() > 0.0) {
    for (double e : audit.energy) {
      audit.budget_fraction.push_back(e / ledger.budget());
      if (e > ledger.budget()) ++audit.devices_over_budget;
    }
  }
  return audit;
}

}  // namespace airbreathe
