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
#include <memory>
#include <span>
#include <vector>

#include "airbreathe/dataset.hpp"
#include "airbreathe/models.hpp"
#include "airbreathe/rng.hpp"
#include "airbreathe/signal_chain.hpp"

namespace airbreathe {

struct TaskSpec {
  TaskKind kind = TaskKind::kLogisticL2;
  double lambda = 0.6;
  std::size_t batch_size = 20;
  double eta = 1.0;
  std::size_t hidden = 16;
  double init_scale = 10.0;

  void validate() const;
};

struct ModelState {
  std::vector<double> w;
  std::size_t round = 0;
  std::vector<bool> prunable;

  std::size_t dim() const { return w.size(); }
};

struct DeviceShard {
  Dataset samples;
  std::size_t device_id = 0;
};

enum class PartitionScheme { kIid, kShards };

struct PartitionSpec {
  PartitionScheme scheme = PartitionScheme::kIid;
  std::size_t per_device = 2;  // shards only
};

// iid: shuffled, dealt into near-equal contiguous pieces.
// shards: samples sorted by label are cut into num_devices * per_device
// label-homogeneous shards (sizes proportional to class frequency); device d
// receives shards d, d+K, d+2K, ...
// after a random relabelling of devices.
std::vector<DeviceShard> partition(const Dataset& data, std::size_t num_devices,
                                   const PartitionSpec& spec, Rng& rng);

// Mean gradient over a batch drawn without replacement from the shard.
GradientVector local_gradient(const ModelState& state, const DeviceShard& shard,
                              const Model& model, std::size_t batch_size, Rng& rng);

GradientVector ideal_aggregate(std::span<const GradientVector> gradients);

ModelState apply_update(const ModelState& state, const GradientVector& update, double eta);
// In-place variant used by the round loop.
void apply_update_inplace(ModelState& state, const GradientVector& update, double eta);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Accuracy is 0 for models without a class prediction.
Evaluation evaluate(const ModelState& state, const Dataset& validation, const Model& model);

ModelSpec model_spec_for(const TaskSpec& task, const Dataset& data);

}  // namespace airbreathe
