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

// Device-side transmitter (spectrum contraction, normalization, spreading)
// and server-side receiver (de-spreading, de-normalization, zero padding).
// Channel inversion and superposition live in channel.hpp.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "airbreathe/rng.hpp"

namespace airbreathe {

// Normalization below this standard deviation is treated as degenerate.
inline constexpr double kSigmaFloor = 1e-12;

struct GradientVector {
  std::vector<double> values;

  GradientVector() = default;
  explicit GradientVector(std::size_t dim) : values(dim, 0.0) {}
  explicit GradientVector(std::vector<double> v) : values(std::move(v)) {}

  std::size_t dim() const { return values.size(); }
  double norm_sq() const;
};

// Selected coordinate set shared by every device in a round.
class PruningMask {
 public:
  // Throws ConfigError unless indices are strictly increasing, nonempty and
  // below source_dim.
  PruningMask(std::vector<std::size_t> indices, std::size_t source_dim);

  static PruningMask full(std::size_t dim);

  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t source_dim() const { return source_dim_; }
  std::size_t size() const { return indices_.size(); }
  // Content hash; identifies the mask a compressed vector came from.
  std::uint64_t id() const { return id_; }

 private:
  std::vector<std::size_t> indices_;
  std::size_t source_dim_;
  std::uint64_t id_;
};

// Coordinates eligible for random pruning. The rest are always transmitted.
class PrunableSet {
 public:
  explicit PrunableSet(std::vector<bool> prunable);
  static PrunableSet all(std::size_t dim);

  std::size_t dim() const { return prunable_.size(); }
  std::size_t prunable_count() const { return prunable_idx_.size(); }
  std::size_t fixed_count() const { return fixed_idx_.size(); }
  bool is_prunable(std::size_t i) const { return prunable_[i]; }

  // S_n = floor(prunable / depth) + fixed, and never below 1.
  std::size_t mask_size_for_depth(std::size_t depth) const;
  // Mask with floor(gamma * prunable) randomly kept coordinates plus all fixed ones.
  std::size_t mask_size_for_ratio(double gamma) const;

  // Uniform draw of `selected` prunable coordinates, merged with the fixed ones.
  PruningMask draw(std::size_t selected, Rng& rng) const;
  PruningMask draw_for_depth(std::size_t depth, Rng& rng) const;

 private:
  std::vector<bool> prunable_;
  std::vector<std::size_t> prunable_idx_;
  std::vector<std::size_t> fixed_idx_;
};

struct CompressedGradient {
  std::vector<double> values;
  std::uint64_t mask_id = 0;

  std::size_t size() const { return values.size(); }
};

struct NormalizationParams {
  double mean = 0.0;
  double std = 1.0;
};

// S x G matrix of +/-1 chips, one row per surviving coefficient.
class PNSequenceSet {
 public:
  PNSequenceSet(std::vector<std::int8_t> chips, std::size_t rows, std::size_t gain,
                std::uint64_t seed = 0);

  // Fair Bernoulli chips drawn from a stream seeded with `seed`.
  static PNSequenceSet generate(std::size_t rows, std::size_t gain, std::uint64_t seed);

  std::size_t rows() const { return rows_; }
  std::size_t gain() const { return gain_; }
  std::uint64_t seed() const { return seed_; }
  int chip(std::size_t s, std::size_t l) const { return chips_[s * gain_ + l]; }
  std::span<const std::int8_t> row(std::size_t s) const {
    return {chips_.data() + s * gain_, gain_};
  }

 private:
  std::vector<std::int8_t> chips_;
  std::size_t rows_;
  std::size_t gain_;
  std::uint64_t seed_;
};

// Received baseband chips, row-major by coefficient then chip.
struct ChipFrame {
  std::vector<std::complex<double>> symbols;

  std::size_t size() const { return symbols.size(); }
};

CompressedGradient prune(const GradientVector& g, const PruningMask& mask);

// Throws DegenerateStatisticsError when p.std <= kSigmaFloor.
CompressedGradient normalize(const CompressedGradient& gc, const NormalizationParams& p);

std::vector<double> spread(const CompressedGradient& gn, const PNSequenceSet& pn);

// Correlates each chip block with its PN row and keeps the real part.
std::vector<double> despread(const ChipFrame& frame, const PNSequenceSet& pn);

// Inverse of normalization and amplitude alignment:
//   out = V / (sqrt(P0) |K|) * y + M
// Throws RoundSkipped when active_count == 0.
std::vector<double> denormalize(std::span<const double> y, const NormalizationParams& p,
                                std::size_t active_count, double p0);

GradientVector zero_pad(std::span<const double> y, const PruningMask& mask);

// Convenience cascade on the device: prune -> normalize -> spread.
std::vector<double> transmit_chain(const GradientVector& g, const PruningMask& mask,
                                   const NormalizationParams& p, const PNSequenceSet& pn);

// Convenience cascade on the server: despread -> denormalize -> zero_pad.
GradientVector receive_chain(const ChipFrame& frame, const PNSequenceSet& pn,
                             const NormalizationParams& p, std::size_t active_count, double p0,
                             const PruningMask& mask);

}  // namespace airbreathe
