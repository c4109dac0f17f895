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
#include <string_view>
#include <vector>

#include "airbreathe/dataset.hpp"
#include "airbreathe/rng.hpp"

namespace airbreathe {

enum class TaskKind { kLogisticL2, kMlpSmall, kCnnMnist, kQuadratic };

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view name);

// Differentiable per-sample loss f_j(w) averaged over a batch, plus an L2
// term (lambda/2)||w||^2 on every coordinate.
class Model {
 public:
  virtual ~Model() = default;

  virtual TaskKind kind() const = 0;
  virtual std::size_t dim() const = 0;
  virtual double lambda() const = 0;

  // Mean loss over `batch` (all rows when empty is not allowed). When grad is
  // non-empty it receives the mean gradient, overwriting its contents.
  virtual double loss_grad(std::span<const double> w, const Dataset& data,
                           std::span<const std::size_t> batch, std::span<double> grad) const = 0;

  // Class prediction for one row; models without classes return -1.
  virtual int predict(std::span<const double> w, std::span<const double> row) const = 0;

  // Weights are prunable, biases are not.
  virtual std::vector<bool> prunable() const = 0;

  virtual std::vector<double> init(Rng& rng) const = 0;
};

struct ModelSpec {
  TaskKind kind = TaskKind::kLogisticL2;
  std::size_t num_features = 0;
  std::size_t num_classes = 2;
  std::size_t hidden = 16;  // mlp_small only
  double lambda = 1e-3;
  double init_scale = 0.0;  // std of initial weights for convex tasks
};

std::unique_ptr<Model> make_model(const ModelSpec& spec);

// Parameter count for a spec without building the model.
std::size_t model_dim(const ModelSpec& spec);

// Convenience wrappers over a full dataset.
double full_loss(const Model& m, std::span<const double> w, const Dataset& data);
std::vector<double> full_gradient(const Model& m, std::span<const double> w, const Dataset& data);

}  // namespace airbreathe
