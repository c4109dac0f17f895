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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "airbreathe/rng.hpp"

namespace airbreathe {

// Dense row-major feature matrix with integer class labels.
struct Dataset {
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
  std::vector<double> x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
  bool empty() const { return y.empty(); }
  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * num_features, num_features};
  }
  void push_back(std::span<const double> features, int label);
  Dataset subset(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> class_counts() const;
};

// Two-class Gaussian mixture. Feature 0 carries the class signal
// scale * ((2y-1) * separation + N(0,1)); features 1..stiff_count have
// standard deviation stiff_std; the rest are N(0, noise_std^2).
struct MixtureSpec {
  std::size_t samples = 2000;
  std::size_t features = 127;
  double separation = 3.0;
  double scale = 1.0;
  double noise_std = 1.0;
  std::size_t stiff_count = 0;
  double stiff_std = 1.0;
};

Dataset make_gaussian_mixture(const MixtureSpec& spec, Rng& rng);

// Unlabelled points x_j ~ N(center * 1, spread^2 I); every label is 0.
Dataset make_gaussian_cloud(std::size_t samples, std::size_t features, double center,
                            double spread, Rng& rng);

// Each row: features..., label. Lines starting with '#' and a non-numeric
// first line are skipped.
Dataset load_csv(const std::string& path);

// MNIST IDX pair. Pixels scaled to [0,1]. limit == 0 loads everything.
Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path,
                       std::size_t limit = 0);

}  // namespace airbreathe
