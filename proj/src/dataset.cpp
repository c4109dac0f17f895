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

#include "airbreathe/dataset.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "airbreathe/error.hpp"

namespace airbreathe {

void Dataset::push_back(std::span<const double> features, int label) {
  if (num_features == 0 && y.empty()) num_features = features.size();
  if (features.size() != num_features) throw ConfigError("dataset row has wrong feature count");
  if (label < 0) throw ConfigError("negative label");
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(label);
  num_classes = std::max<std::size_t>(num_classes, static_cast<std::size_t>(label) + 1);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.num_features = num_features;
  out.num_classes = num_classes;
  out.x.reserve(indices.size() * num_features);
  out.y.reserve(indices.size());
  for (std::size_t i : indices) {
    auto r = row(i);
    out.x.insert(out.x.end(), r.begin(), r.end());
    out.y.push_back(y[i]);
  }
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (int label : y) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

Dataset make_gaussian_mixture(const MixtureSpec& spec, Rng& rng) {
  if (spec.features == 0) throw ConfigError("mixture needs at least one feature");
  if (spec.stiff_count + 1 > spec.features) throw ConfigError("stiff_count exceeds features");
  Dataset ds;
  ds.num_features = spec.features;
  ds.num_classes = 2;
  ds.x.resize(spec.samples * spec.features);
  ds.y.resize(spec.samples);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    int label = coin(rng) ? 1 : 0;
    ds.y[i] = label;
    double* r = ds.x.data() + i * spec.features;
    r[0] = spec.scale * ((2.0 * label - 1.0) * spec.separation + normal(rng));
    for (std::size_t f = 1; f < spec.features; ++f) {
      double sd = f <= spec.stiff_count ? spec.stiff_std : spec.noise_std;
      r[f] = sd * normal(rng);
    }
  }
  return ds;
}

Dataset make_gaussian_cloud(std::size_t samples, std::size_t features, double center,
                            double spread, Rng& rng) {
  if (features == 0) throw ConfigError("cloud needs at least one feature");
  Dataset ds;
  ds.num_features = features;
  ds.num_classes = 1;
  ds.x.resize(samples * features);
  ds.y.assign(samples, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : ds.x) v = center + spread * normal(rng);
  return ds;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Dataset ds;
  std::string line;
  bool first = true;
  std::vector<double> row;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    row.clear();
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw ConfigError("non-numeric cell in " + path);
    }
    first = false;
    if (row.size() < 2) throw ConfigError("csv row needs features and a label");
    double label = row.back();
    row.pop_back();
    ds.push_back(row, static_cast<int>(label));
  }
  if (ds.empty()) throw ConfigError("no rows in " + path);
  return ds;
}

namespace {

std::uint32_t read_be32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (!in) throw IoError("truncated IDX header");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

}  // namespace

Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path,
                       std::size_t limit) {
  std::ifstream img(images_path, std::ios::binary);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!img) throw IoError("cannot open " + images_path);
  if (!lab) throw IoError("cannot open " + labels_path);
  if (read_be32(img) != 0x00000803) throw IoError("bad IDX image magic");
  if (read_be32(lab) != 0x00000801) throw IoError("bad IDX label magic");
  std::size_t n = read_be32(img);
  std::size_t rows = read_be32(img);
  std::size_t cols = read_be32(img);
  if (read_be32(lab) != n) throw IoError("image/label count mismatch");
  if (limit != 0) n = std::min(n, limit);

  Dataset ds;
  ds.num_features = rows * cols;
  ds.num_classes = 10;
  ds.x.resize(n * ds.num_features);
  ds.y.resize(n);
  std::vector<unsigned char> buf(ds.num_features);
  for (std::size_t i = 0; i < n; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    char l = 0;
    lab.read(&l, 1);
    if (!img || !lab) throw IoError("truncated IDX payload");
    for (std::size_t f = 0; f < buf.size(); ++f) ds.x[i * ds.num_features + f] = buf[f] / 255.0;
    ds.y[i] = static_cast<unsigned char>(l);
  }
  return ds;
}

}  // namespace airbreathe
