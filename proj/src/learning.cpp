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

#include "airbreathe/learning.hpp"

#include <algorithm>
#include <numeric>

#include "airbreathe/error.hpp"

namespace airbreathe {

void TaskSpec::validate() const {
  if (!(eta > 0)) throw ConfigError("learning rate must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (lambda < 0) throw ConfigError("lambda must be nonnegative");
  if (kind == TaskKind::kLogisticL2 && !(lambda > 0)) {
    throw ConfigError("logistic_l2 requires lambda > 0");
  }
}

std::vector<DeviceShard> partition(const Dataset& data, std::size_t num_devices,
                                   const PartitionSpec& spec, Rng& rng) {
  if (num_devices == 0) throw ConfigError("need at least one device");
  if (data.size() < num_devices) throw ConfigError("fewer samples than devices");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<std::size_t>> assigned(num_devices);
  if (spec.scheme == PartitionScheme::kIid) {
    std::size_t base = data.size() / num_devices, extra = data.size() % num_devices;
    std::size_t at = 0;
    for (std::size_t d = 0; d < num_devices; ++d) {
      std::size_t n = base + (d < extra ? 1 : 0);
      assigned[d].assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                         order.begin() + static_cast<std::ptrdiff_t>(at + n));
      at += n;
    }
  } else {
    if (spec.per_device == 0) throw ConfigError("shards per device must be positive");
    std::size_t present = 0;
    for (std::size_t c : data.class_counts()) present += c > 0 ? 1 : 0;
    if (spec.per_device > 1 && present < 2) {
      throw ConfigError("shard partition needs at least two classes");
    }
    std::size_t total = num_devices * spec.per_device;
    if (data.size() < total) throw ConfigError("fewer samples than shards");
    if (total < present) throw ConfigError("fewer shards than classes");
    std::vector<std::vector<std::size_t>> by_label(data.num_classes);
    for (std::size_t i : order) by_label[static_cast<std::size_t>(data.y[i])].push_back(i);
    // One shard per present class, the rest by largest remainder on class size.
    std::vector<std::size_t> quota(data.num_classes, 0);
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t given = 0;
    for (std::size_t c = 0; c < data.num_classes; ++c) {
      if (by_label[c].empty()) continue;
      double share = static_cast<double>(by_label[c].size()) * static_cast<double>(total - present) /
                     static_cast<double>(data.size());
      quota[c] = 1 + static_cast<std::size_t>(share);
      given += quota[c];
      rem.emplace_back(share - static_cast<double>(quota[c] - 1), c);
    }
    std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; given < total; ++i, ++given) ++quota[rem[i % rem.size()].second];
    std::vector<std::vector<std::size_t>> shard_list;
    for (std::size_t c = 0; c < data.num_classes; ++c) {
      const auto& grp = by_label[c];
      if (quota[c] > grp.size()) throw ConfigError("not enough samples for label-homogeneous shards");
      for (std::size_t q = 0; q < quota[c]; ++q) {
        std::size_t lo = q * grp.size() / quota[c], hi = (q + 1) * grp.size() / quota[c];
        shard_list.emplace_back(grp.begin() + static_cast<std::ptrdiff_t>(lo),
                                grp.begin() + static_cast<std::ptrdiff_t>(hi));
      }
    }
    std::vector<std::size_t> relabel(num_devices);
    std::iota(relabel.begin(), relabel.end(), std::size_t{0});
    std::shuffle(relabel.begin(), relabel.end(), rng);
    for (std::size_t s = 0; s < total; ++s) {
      auto& dst = assigned[relabel[s % num_devices]];
      dst.insert(dst.end(), shard_list[s].begin(), shard_list[s].end());
    }
  }

  std::vector<DeviceShard> shards(num_devices);
  for (std::size_t d = 0; d < num_devices; ++d) {
    std::sort(assigned[d].begin(), assigned[d].end());
    shards[d].samples = data.subset(assigned[d]);
    shards[d].device_id = d;
  }
  return shards;
}

GradientVector local_gradient(const ModelState& state, const DeviceShard& shard,
                              const Model& model, std::size_t batch_size, Rng& rng) {
  std::size_t n = shard.samples.size();
  if (batch_size == 0 || batch_size > n) throw ConfigError("batch size exceeds shard size");
  // Partial Fisher-Yates over the index range.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(batch_size);
  GradientVector g(model.dim());
  model.loss_grad(state.w, shard.samples, idx, g.values);
  return g;
}

GradientVector ideal_aggregate(std::span<const GradientVector> gradients) {
  if (gradients.empty()) throw ConfigError("nothing to aggregate");
  std::size_t d = gradients.front().dim();
  GradientVector out(d);
  for (const auto& g : gradients) {
    if (g.dim() != d) throw ConfigError("gradient dimensions differ");
    for (std::size_t i = 0; i < d; ++i) out.values[i] += g.values[i];
  }
  for (double& v : out.values) v /= static_cast<double>(gradients.size());
  return out;
}

void apply_update_inplace(ModelState& state, const GradientVector& update, double eta) {
  if (update.dim() != state.dim()) throw ConfigError("update dimension mismatch");
  for (std::size_t i = 0; i < state.w.size(); ++i) state.w[i] -= eta * update.values[i];
  ++state.round;
}

ModelState apply_update(const ModelState& state, const GradientVector& update, double eta) {
  ModelState next = state;
  apply_update_inplace(next, update, eta);
  return next;
}

Evaluation evaluate(const ModelState& state, const Dataset& validation, const Model& model) {
  Evaluation ev;
  if (validation.empty()) return ev;
  ev.loss = full_loss(model, state.w, validation);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < validation.size(); ++i) {
    if (model.predict(state.w, validation.row(i)) == validation.y[i]) ++hits;
  }
  ev.accuracy = static_cast<double>(hits) / static_cast<double>(validation.size());
  return ev;
}

ModelSpec model_spec_for(const TaskSpec& task, const Dataset& data) {
  ModelSpec spec;
  spec.kind = task.kind;
  spec.num_features = data.num_features;
  spec.num_classes = std::max<std::size_t>(data.num_classes, 2);
  spec.hidden = task.hidden;
  spec.lambda = task.lambda;
  spec.init_scale = task.init_scale;
  return spec;
}

}  // namespace airbreathe
