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

#include "airbreathe/signal_chain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "airbreathe/error.hpp"

namespace airbreathe {

double GradientVector::norm_sq() const {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return acc;
}

namespace {

std::uint64_t fingerprint(const std::vector<std::size_t>& idx, std::size_t dim) {
  std::uint64_t h = splitmix64(dim);
  for (std::size_t i : idx) h = splitmix64(h ^ i);
  return h;
}

}  // namespace

PruningMask::PruningMask(std::vector<std::size_t> indices, std::size_t source_dim)
    : indices_(std::move(indices)), source_dim_(source_dim) {
  if (indices_.empty()) throw ConfigError("pruning mask must select at least one coordinate");
  for (std::size_t j = 0; j < indices_.size(); ++j) {
    if (indices_[j] >= source_dim_)
      throw ConfigError("pruning mask index " + std::to_string(indices_[j]) +
                        " out of range for dimension " + std::to_string(source_dim_));
    if (j > 0 && indices_[j] <= indices_[j - 1])
      throw ConfigError("pruning mask indices must be strictly increasing");
  }
  id_ = fingerprint(indices_, source_dim_);
}

PruningMask PruningMask::full(std::size_t dim) {
  std::vector<std::size_t> idx(dim);
  for (std::size_t i = 0; i < dim; ++i) idx[i] = i;
  return PruningMask(std::move(idx), dim);
}

PrunableSet::PrunableSet(std::vector<bool> prunable) : prunable_(std::move(prunable)) {
  if (prunable_.empty()) throw ConfigError("prunable set over an empty model");
  for (std::size_t i = 0; i < prunable_.size(); ++i)
    (prunable_[i] ? prunable_idx_ : fixed_idx_).push_back(i);
}

PrunableSet PrunableSet::all(std::size_t dim) { return PrunableSet(std::vector<bool>(dim, true)); }

std::size_t PrunableSet::mask_size_for_depth(std::size_t depth) const {
  if (depth == 0) throw ConfigError("breathing depth must be >= 1");
  const std::size_t s = prunable_count() / depth + fixed_count();
  return std::max<std::size_t>(s, 1);
}

std::size_t PrunableSet::mask_size_for_ratio(double gamma) const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("pruning ratio must lie in (0, 1]");
  auto kept = static_cast<std::size_t>(std::floor(gamma * static_cast<double>(prunable_count())));
  return std::max<std::size_t>(kept + fixed_count(), 1);
}

PruningMask PrunableSet::draw(std::size_t selected, Rng& rng) const {
  if (selected > prunable_count())
    throw ConfigError("cannot select more coordinates than are prunable");
  std::vector<std::size_t> pool = prunable_idx_;
  // Partial Fisher-Yates: the first `selected` entries form a uniform subset.
  for (std::size_t i = 0; i < selected; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(selected);
  pool.insert(pool.end(), fixed_idx_.begin(), fixed_idx_.end());
  std::sort(pool.begin(), pool.end());
  return PruningMask(std::move(pool), dim());
}

PruningMask PrunableSet::draw_for_depth(std::size_t depth, Rng& rng) const {
  const std::size_t s = mask_size_for_depth(depth);
  const std::size_t from_pool = s > fixed_count() ? s - fixed_count() : 0;
  return draw(std::min(from_pool, prunable_count()), rng);
}

PNSequenceSet::PNSequenceSet(std::vector<std::int8_t> chips, std::size_t rows, std::size_t gain,
                             std::uint64_t seed)
    : chips_(std::move(chips)), rows_(rows), gain_(gain), seed_(seed) {
  if (gain_ == 0) throw ConfigError("processing gain must be >= 1");
  if (chips_.size() != rows_ * gain_) throw ConfigError("PN chip matrix has the wrong size");
  for (auto c : chips_)
    if (c != 1 && c != -1) throw ConfigError("PN chips must be +1 or -1");
}

PNSequenceSet PNSequenceSet::generate(std::size_t rows, std::size_t gain, std::uint64_t seed) {
  Rng rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::int8_t> chips(rows * gain);
  for (auto& c : chips) c = coin(rng) ? 1 : -1;
  return PNSequenceSet(std::move(chips), rows, gain, seed);
}

CompressedGradient prune(const GradientVector& g, const PruningMask& mask) {
  if (mask.source_dim() != g.dim())
    throw ConfigError("prune: mask built for dimension " + std::to_string(mask.source_dim()) +
                      ", gradient has " + std::to_string(g.dim()));
  CompressedGradient out;
  out.mask_id = mask.id();
  out.values.reserve(mask.size());
  for (std::size_t i : mask.indices()) out.values.push_back(g.values[i]);
  return out;
}

CompressedGradient normalize(const CompressedGradient& gc, const NormalizationParams& p) {
  if (!(p.std > kSigmaFloor))
    throw DegenerateStatisticsError("normalization std " + std::to_string(p.std) +
                                    " is below the floor");
  CompressedGradient out;
  out.mask_id = gc.mask_id;
  out.values.resize(gc.size());
  for (std::size_t s = 0; s < gc.size(); ++s) out.values[s] = (gc.values[s] - p.mean) / p.std;
  return out;
}

std::vector<double> spread(const CompressedGradient& gn, const PNSequenceSet& pn) {
  if (pn.rows() != gn.size())
    throw ConfigError("spread: " + std::to_string(pn.rows()) + " PN rows for " +
                      std::to_string(gn.size()) + " symbols");
  const std::size_t gain = pn.gain();
  std::vector<double> out(gn.size() * gain);
  for (std::size_t s = 0; s < gn.size(); ++s) {
    auto row = pn.row(s);
    for (std::size_t l = 0; l < gain; ++l) out[s * gain + l] = gn.values[s] * row[l];
  }
  return out;
}

std::vector<double> despread(const ChipFrame& frame, const PNSequenceSet& pn) {
  const std::size_t gain = pn.gain();
  if (frame.size() != pn.rows() * gain)
    throw ConfigError("despread: frame of " + std::to_string(frame.size()) +
                      " chips does not match " + std::to_string(pn.rows()) + "x" +
                      std::to_string(gain));
  std::vector<double> out(pn.rows());
  for (std::size_t s = 0; s < pn.rows(); ++s) {
    auto row = pn.row(s);
    double acc = 0.0;
    for (std::size_t l = 0; l < gain; ++l) acc += row[l] * frame.symbols[s * gain + l].real();
    out[s] = acc / static_cast<double>(gain);
  }
  return out;
}

std::vector<double> denormalize(std::span<const double> y, const NormalizationParams& p,
                                std::size_t active_count, double p0) {
  if (active_count == 0) throw RoundSkipped("no active device in this round");
  if (!(p0 > 0.0)) throw ConfigError("alignment power P0 must be positive");
  const double scale = p.std / (std::sqrt(p0) * static_cast<double>(active_count));
  std::vector<double> out(y.size());
  for (std::size_t s = 0; s < y.size(); ++s) out[s] = scale * y[s] + p.mean;
  return out;
}

GradientVector zero_pad(std::span<const double> y, const PruningMask& mask) {
  if (y.size() != mask.size())
    throw ConfigError("zero_pad: " + std::to_string(y.size()) + " values for a mask of " +
                      std::to_string(mask.size()));
  GradientVector out(mask.source_dim());
  const auto& idx = mask.indices();
  for (std::size_t j = 0; j < idx.size(); ++j) out.values[idx[j]] = y[j];
  return out;
}

std::vector<double> transmit_chain(const GradientVector& g, const PruningMask& mask,
                                   const NormalizationParams& p, const PNSequenceSet& pn) {
  return spread(normalize(prune(g, mask), p), pn);
}

GradientVector receive_chain(const ChipFrame& frame, const PNSequenceSet& pn,
                             const NormalizationParams& p, std::size_t active_count, double p0,
                             const PruningMask& mask) {
  const auto y = despread(frame, pn);
  const auto yhat = denormalize(y, p, active_count, p0);
  return zero_pad(yhat, mask);
}

}  // namespace airbreathe
