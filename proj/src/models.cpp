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

#include "airbreathe/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "airbreathe/error.hpp"

namespace airbreathe {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kLogisticL2: return "logistic_l2";
    case TaskKind::kMlpSmall: return "mlp_small";
    case TaskKind::kCnnMnist: return "cnn_mnist_optional";
    case TaskKind::kQuadratic: return "quadratic";
  }
  return "unknown";
}

TaskKind task_kind_from_string(std::string_view name) {
  if (name == "logistic_l2") return TaskKind::kLogisticL2;
  if (name == "mlp_small") return TaskKind::kMlpSmall;
  if (name == "cnn_mnist_optional" || name == "cnn_mnist") return TaskKind::kCnnMnist;
  if (name == "quadratic") return TaskKind::kQuadratic;
  throw ConfigError("unknown task kind: " + std::string(name));
}

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double add_l2(std::span<const double> w, double lambda, std::span<double> grad) {
  if (lambda == 0.0) return 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sq += w[i] * w[i];
    if (!grad.empty()) grad[i] += lambda * w[i];
  }
  return 0.5 * lambda * sq;
}

void check_batch(std::span<const double> w, std::size_t dim, std::span<const std::size_t> batch,
                 std::span<double> grad) {
  if (w.size() != dim) throw ConfigError("parameter vector has wrong dimension");
  if (batch.empty()) throw ConfigError("empty batch");
  if (!grad.empty() && grad.size() != dim) throw ConfigError("gradient buffer has wrong dimension");
}

// Softmax cross-entropy in place: logits -> probabilities, returns -log p[label].
double softmax_xent(std::span<double> logits, int label) {
  double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
  return -std::log(std::max(logits[static_cast<std::size_t>(label)], 1e-300));
}

class LogisticL2 final : public Model {
 public:
  LogisticL2(std::size_t features, double lambda, double init_scale)
      : features_(features), lambda_(lambda), init_scale_(init_scale) {}

  TaskKind kind() const override { return TaskKind::kLogisticL2; }
  std::size_t dim() const override { return features_ + 1; }
  double lambda() const override { return lambda_; }

  double loss_grad(std::span<const double> w, const Dataset& data,
                   std::span<const std::size_t> batch, std::span<double> grad) const override {
    check_batch(w, dim(), batch, grad);
    std::fill(grad.begin(), grad.end(), 0.0);
    double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (std::size_t j : batch) {
      auto x = data.row(j);
      double z = w[features_];
      for (std::size_t f = 0; f < features_; ++f) z += w[f] * x[f];
      double y = data.y[j] > 0 ? 1.0 : 0.0;
      loss += softplus(z) - y * z;
      if (!grad.empty()) {
        double r = (sigmoid(z) - y) * inv_b;
        for (std::size_t f = 0; f < features_; ++f) grad[f] += r * x[f];
        grad[features_] += r;
      }
    }
    return loss * inv_b + add_l2(w, lambda_, grad);
  }

  int predict(std::span<const double> w, std::span<const double> row) const override {
    double z = w[features_];
    for (std::size_t f = 0; f < features_; ++f) z += w[f] * row[f];
    return z > 0 ? 1 : 0;
  }

  std::vector<bool> prunable() const override {
    std::vector<bool> p(dim(), true);
    p.back() = false;
    return p;
  }

  std::vector<double> init(Rng& rng) const override {
    std::vector<double> w(dim(), 0.0);
    if (init_scale_ > 0) {
      std::normal_distribution<double> n(0.0, init_scale_);
      for (double& v : w) v = n(rng);
    }
    return w;
  }

 private:
  std::size_t features_;
  double lambda_;
  double init_scale_;
};

class Quadratic final : public Model {
 public:
  Quadratic(std::size_t features, double lambda, double init_scale)
      : features_(features), lambda_(lambda), init_scale_(init_scale) {}

  TaskKind kind() const override { return TaskKind::kQuadratic; }
  std::size_t dim() const override { return features_; }
  double lambda() const override { return lambda_; }

  double loss_grad(std::span<const double> w, const Dataset& data,
                   std::span<const std::size_t> batch, std::span<double> grad) const override {
    check_batch(w, dim(), batch, grad);
    std::fill(grad.begin(), grad.end(), 0.0);
    double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (std::size_t j : batch) {
      auto x = data.row(j);
      for (std::size_t f = 0; f < features_; ++f) {
        double d = w[f] - x[f];
        loss += 0.5 * d * d;
        if (!grad.empty()) grad[f] += d * inv_b;
      }
    }
    return loss * inv_b + add_l2(w, lambda_, grad);
  }

  int predict(std::span<const double>, std::span<const double>) const override { return -1; }

  std::vector<bool> prunable() const override { return std::vector<bool>(dim(), true); }

  std::vector<double> init(Rng& rng) const override {
    std::vector<double> w(dim(), 0.0);
    if (init_scale_ > 0) {
      std::normal_distribution<double> n(0.0, init_scale_);
      for (double& v : w) v = n(rng);
    }
    return w;
  }

 private:
  std::size_t features_;
  double lambda_;
  double init_scale_;
};

void uniform_fill(std::span<double> v, double bound, Rng& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& x : v) x = u(rng);
}

// in -> tanh(W1 x + b1) -> W2 h + b2 -> softmax. Layout W1, b1, W2, b2.
class MlpSmall final : public Model {
 public:
  MlpSmall(std::size_t in, std::size_t hidden, std::size_t classes, double lambda)
      : in_(in), hid_(hidden), out_(classes), lambda_(lambda) {}

  TaskKind kind() const override { return TaskKind::kMlpSmall; }
  std::size_t dim() const override { return hid_ * in_ + hid_ + out_ * hid_ + out_; }
  double lambda() const override { return lambda_; }

  double loss_grad(std::span<const double> w, const Dataset& data,
                   std::span<const std::size_t> batch, std::span<double> grad) const override {
    check_batch(w, dim(), batch, grad);
    std::fill(grad.begin(), grad.end(), 0.0);
    const double* w1 = w.data();
    const double* b1 = w1 + hid_ * in_;
    const double* w2 = b1 + hid_;
    const double* b2 = w2 + out_ * hid_;
    double inv_b = 1.0 / static_cast<double>(batch.size());
    std::vector<double> h(hid_), o(out_), dh(hid_);
    double loss = 0.0;
    for (std::size_t j : batch) {
      auto x = data.row(j);
      forward(w, x, h, o);
      loss += softmax_xent(o, data.y[j]);
      if (grad.empty()) continue;
      double* g1 = grad.data();
      double* gb1 = g1 + hid_ * in_;
      double* g2 = gb1 + hid_;
      double* gb2 = g2 + out_ * hid_;
      o[static_cast<std::size_t>(data.y[j])] -= 1.0;
      std::fill(dh.begin(), dh.end(), 0.0);
      for (std::size_t c = 0; c < out_; ++c) {
        double d = o[c] * inv_b;
        gb2[c] += d;
        for (std::size_t u = 0; u < hid_; ++u) {
          g2[c * hid_ + u] += d * h[u];
          dh[u] += o[c] * w2[c * hid_ + u];
        }
      }
      for (std::size_t u = 0; u < hid_; ++u) {
        double d = dh[u] * (1.0 - h[u] * h[u]) * inv_b;
        gb1[u] += d;
        for (std::size_t f = 0; f < in_; ++f) g1[u * in_ + f] += d * x[f];
      }
    }
    (void)b2;
    return loss * inv_b + add_l2(w, lambda_, grad);
  }

  int predict(std::span<const double> w, std::span<const double> row) const override {
    std::vector<double> h(hid_), o(out_);
    forward(w, row, h, o);
    return static_cast<int>(std::max_element(o.begin(), o.end()) - o.begin());
  }

  std::vector<bool> prunable() const override {
    std::vector<bool> p(dim(), true);
    std::fill_n(p.begin() + static_cast<std::ptrdiff_t>(hid_ * in_), hid_, false);
    std::fill(p.end() - static_cast<std::ptrdiff_t>(out_), p.end(), false);
    return p;
  }

  std::vector<double> init(Rng& rng) const override {
    std::vector<double> w(dim(), 0.0);
    std::span<double> s(w);
    uniform_fill(s.subspan(0, hid_ * in_), std::sqrt(6.0 / static_cast<double>(in_ + hid_)), rng);
    uniform_fill(s.subspan(hid_ * in_ + hid_, out_ * hid_),
                 std::sqrt(6.0 / static_cast<double>(hid_ + out_)), rng);
    return w;
  }

 private:
  void forward(std::span<const double> w, std::span<const double> x, std::vector<double>& h,
               std::vector<double>& o) const {
    const double* w1 = w.data();
    const double* b1 = w1 + hid_ * in_;
    const double* w2 = b1 + hid_;
    const double* b2 = w2 + out_ * hid_;
    for (std::size_t u = 0; u < hid_; ++u) {
      double z = b1[u];
      for (std::size_t f = 0; f < in_; ++f) z += w1[u * in_ + f] * x[f];
      h[u] = std::tanh(z);
    }
    for (std::size_t c = 0; c < out_; ++c) {
      double z = b2[c];
      for (std::size_t u = 0; u < hid_; ++u) z += w2[c * hid_ + u] * h[u];
      o[c] = z;
    }
  }

  std::size_t in_, hid_, out_;
  double lambda_;
};

// 28x28 -> conv5x5(10) -> relu -> pool2 -> conv5x5(20) -> relu -> pool2
//       -> fc(320,50) -> relu -> fc(50,10) -> softmax.
class CnnMnist final : public Model {
  static constexpr std::size_t kIn = 28, kK = 5, kC1 = 10, kC2 = 20;
  static constexpr std::size_t kS1 = kIn - kK + 1;  // 24
  static constexpr std::size_t kP1 = kS1 / 2;       // 12
  static constexpr std::size_t kS2 = kP1 - kK + 1;  // 8
  static constexpr std::size_t kP2 = kS2 / 2;       // 4
  static constexpr std::size_t kFlat = kC2 * kP2 * kP2;  // 320
  static constexpr std::size_t kH = 50, kOut = 10;

  static constexpr std::size_t kC1w = 0;
  static constexpr std::size_t kC1b = kC1w + kC1 * kK * kK;
  static constexpr std::size_t kC2w = kC1b + kC1;
  static constexpr std::size_t kC2b = kC2w + kC2 * kC1 * kK * kK;
  static constexpr std::size_t kF1w = kC2b + kC2;
  static constexpr std::size_t kF1b = kF1w + kH * kFlat;
  static constexpr std::size_t kF2w = kF1b + kH;
  static constexpr std::size_t kF2b = kF2w + kOut * kH;
  static constexpr std::size_t kDim = kF2b + kOut;

  struct Acts {
    std::vector<double> a1 = std::vector<double>(kC1 * kS1 * kS1);  // post-relu
    std::vector<double> p1 = std::vector<double>(kC1 * kP1 * kP1);
    std::vector<std::size_t> arg1 = std::vector<std::size_t>(kC1 * kP1 * kP1);
    std::vector<double> a2 = std::vector<double>(kC2 * kS2 * kS2);
    std::vector<double> p2 = std::vector<double>(kFlat);
    std::vector<std::size_t> arg2 = std::vector<std::size_t>(kFlat);
    std::vector<double> h = std::vector<double>(kH);
    std::vector<double> o = std::vector<double>(kOut);
  };

 public:
  explicit CnnMnist(double lambda) : lambda_(lambda) {}

  TaskKind kind() const override { return TaskKind::kCnnMnist; }
  std::size_t dim() const override { return kDim; }
  double lambda() const override { return lambda_; }

  double loss_grad(std::span<const double> w, const Dataset& data,
                   std::span<const std::size_t> batch, std::span<double> grad) const override {
    check_batch(w, dim(), batch, grad);
    if (data.num_features != kIn * kIn) throw ConfigError("cnn expects 28x28 inputs");
    std::fill(grad.begin(), grad.end(), 0.0);
    double inv_b = 1.0 / static_cast<double>(batch.size());
    Acts a;
    std::vector<double> dp2(kFlat), da2(kC2 * kS2 * kS2), dp1(kC1 * kP1 * kP1),
        da1(kC1 * kS1 * kS1), dh(kH);
    double loss = 0.0;
    for (std::size_t j : batch) {
      auto x = data.row(j);
      forward(w, x, a);
      loss += softmax_xent(a.o, data.y[j]);
      if (grad.empty()) continue;
      a.o[static_cast<std::size_t>(data.y[j])] -= 1.0;
      for (double& v : a.o) v *= inv_b;

      std::fill(dh.begin(), dh.end(), 0.0);
      for (std::size_t c = 0; c < kOut; ++c) {
        grad[kF2b + c] += a.o[c];
        for (std::size_t u = 0; u < kH; ++u) {
          grad[kF2w + c * kH + u] += a.o[c] * a.h[u];
          dh[u] += a.o[c] * w[kF2w + c * kH + u];
        }
      }
      std::fill(dp2.begin(), dp2.end(), 0.0);
      for (std::size_t u = 0; u < kH; ++u) {
        if (a.h[u] <= 0) continue;
        grad[kF1b + u] += dh[u];
        for (std::size_t i = 0; i < kFlat; ++i) {
          grad[kF1w + u * kFlat + i] += dh[u] * a.p2[i];
          dp2[i] += dh[u] * w[kF1w + u * kFlat + i];
        }
      }
      std::fill(da2.begin(), da2.end(), 0.0);
      for (std::size_t i = 0; i < kFlat; ++i) {
        if (a.a2[a.arg2[i]] > 0) da2[a.arg2[i]] += dp2[i];
      }
      std::fill(dp1.begin(), dp1.end(), 0.0);
      for (std::size_t oc = 0; oc < kC2; ++oc) {
        for (std::size_t r = 0; r < kS2; ++r) {
          for (std::size_t c = 0; c < kS2; ++c) {
            double d = da2[(oc * kS2 + r) * kS2 + c];
            if (d == 0.0) continue;
            grad[kC2b + oc] += d;
            for (std::size_t ic = 0; ic < kC1; ++ic) {
              for (std::size_t kr = 0; kr < kK; ++kr) {
                for (std::size_t kc = 0; kc < kK; ++kc) {
                  std::size_t wi = kC2w + ((oc * kC1 + ic) * kK + kr) * kK + kc;
                  std::size_t pi = (ic * kP1 + r + kr) * kP1 + c + kc;
                  grad[wi] += d * a.p1[pi];
                  dp1[pi] += d * w[wi];
                }
              }
            }
          }
        }
      }
      std::fill(da1.begin(), da1.end(), 0.0);
      for (std::size_t i = 0; i < dp1.size(); ++i) {
        if (a.a1[a.arg1[i]] > 0) da1[a.arg1[i]] += dp1[i];
      }
      for (std::size_t oc = 0; oc < kC1; ++oc) {
        for (std::size_t r = 0; r < kS1; ++r) {
          for (std::size_t c = 0; c < kS1; ++c) {
            double d = da1[(oc * kS1 + r) * kS1 + c];
            if (d == 0.0) continue;
            grad[kC1b + oc] += d;
            for (std::size_t kr = 0; kr < kK; ++kr) {
              for (std::size_t kc = 0; kc < kK; ++kc) {
                grad[kC1w + (oc * kK + kr) * kK + kc] += d * x[(r + kr) * kIn + c + kc];
              }
            }
          }
        }
      }
    }
    return loss * inv_b + add_l2(w, lambda_, grad);
  }

  int predict(std::span<const double> w, std::span<const double> row) const override {
    Acts a;
    forward(w, row, a);
    return static_cast<int>(std::max_element(a.o.begin(), a.o.end()) - a.o.begin());
  }

  std::vector<bool> prunable() const override {
    std::vector<bool> p(kDim, true);
    auto clear = [&](std::size_t from, std::size_t n) {
      std::fill_n(p.begin() + static_cast<std::ptrdiff_t>(from), n, false);
    };
    clear(kC1b, kC1);
    clear(kC2b, kC2);
    clear(kF1b, kH);
    clear(kF2b, kOut);
    return p;
  }

  std::vector<double> init(Rng& rng) const override {
    std::vector<double> w(kDim, 0.0);
    std::span<double> s(w);
    auto he = [](std::size_t fan_in) { return std::sqrt(6.0 / static_cast<double>(fan_in)); };
    uniform_fill(s.subspan(kC1w, kC1b - kC1w), he(kK * kK), rng);
    uniform_fill(s.subspan(kC2w, kC2b - kC2w), he(kC1 * kK * kK), rng);
    uniform_fill(s.subspan(kF1w, kF1b - kF1w), he(kFlat), rng);
    uniform_fill(s.subspan(kF2w, kF2b - kF2w), he(kH), rng);
    return w;
  }

 private:
  void forward(std::span<const double> w, std::span<const double> x, Acts& a) const {
    for (std::size_t oc = 0; oc < kC1; ++oc) {
      for (std::size_t r = 0; r < kS1; ++r) {
        for (std::size_t c = 0; c < kS1; ++c) {
          double z = w[kC1b + oc];
          for (std::size_t kr = 0; kr < kK; ++kr) {
            for (std::size_t kc = 0; kc < kK; ++kc) {
              z += w[kC1w + (oc * kK + kr) * kK + kc] * x[(r + kr) * kIn + c + kc];
            }
          }
          a.a1[(oc * kS1 + r) * kS1 + c] = std::max(z, 0.0);
        }
      }
    }
    pool(a.a1, kC1, kS1, a.p1, a.arg1);
    for (std::size_t oc = 0; oc < kC2; ++oc) {
      for (std::size_t r = 0; r < kS2; ++r) {
        for (std::size_t c = 0; c < kS2; ++c) {
          double z = w[kC2b + oc];
          for (std::size_t ic = 0; ic < kC1; ++ic) {
            for (std::size_t kr = 0; kr < kK; ++kr) {
              for (std::size_t kc = 0; kc < kK; ++kc) {
                z += w[kC2w + ((oc * kC1 + ic) * kK + kr) * kK + kc] *
                     a.p1[(ic * kP1 + r + kr) * kP1 + c + kc];
              }
            }
          }
          a.a2[(oc * kS2 + r) * kS2 + c] = std::max(z, 0.0);
        }
      }
    }
    pool(a.a2, kC2, kS2, a.p2, a.arg2);
    for (std::size_t u = 0; u < kH; ++u) {
      double z = w[kF1b + u];
      for (std::size_t i = 0; i < kFlat; ++i) z += w[kF1w + u * kFlat + i] * a.p2[i];
      a.h[u] = std::max(z, 0.0);
    }
    for (std::size_t c = 0; c < kOut; ++c) {
      double z = w[kF2b + c];
      for (std::size_t u = 0; u < kH; ++u) z += w[kF2w + c * kH + u] * a.h[u];
      a.o[c] = z;
    }
  }

  static void pool(const std::vector<double>& in, std::size_t ch, std::size_t side,
                   std::vector<double>& out, std::vector<std::size_t>& arg) {
    std::size_t half = side / 2;
    for (std::size_t c = 0; c < ch; ++c) {
      for (std::size_t r = 0; r < half; ++r) {
        for (std::size_t q = 0; q < half; ++q) {
          std::size_t best = (c * side + 2 * r) * side + 2 * q;
          for (std::size_t dr = 0; dr < 2; ++dr) {
            for (std::size_t dq = 0; dq < 2; ++dq) {
              std::size_t i = (c * side + 2 * r + dr) * side + 2 * q + dq;
              if (in[i] > in[best]) best = i;
            }
          }
          std::size_t o = (c * half + r) * half + q;
          out[o] = in[best];
          arg[o] = best;
        }
      }
    }
  }

  double lambda_;
};

}  // namespace

std::unique_ptr<Model> make_model(const ModelSpec& spec) {
  if (spec.lambda < 0) throw ConfigError("lambda must be nonnegative");
  switch (spec.kind) {
    case TaskKind::kLogisticL2:
      if (spec.num_features == 0) throw ConfigError("logistic_l2 needs features");
      if (spec.num_classes > 2) throw ConfigError("logistic_l2 is a binary task");
      if (spec.lambda <= 0) throw ConfigError("logistic_l2 needs lambda > 0");
      return std::make_unique<LogisticL2>(spec.num_features, spec.lambda, spec.init_scale);
    case TaskKind::kQuadratic:
      if (spec.num_features == 0) throw ConfigError("quadratic needs features");
      return std::make_unique<Quadratic>(spec.num_features, spec.lambda, spec.init_scale);
    case TaskKind::kMlpSmall:
      if (spec.num_features == 0 || spec.hidden == 0 || spec.num_classes < 2) {
        throw ConfigError("mlp_small needs features, hidden units and >= 2 classes");
      }
      return std::make_unique<MlpSmall>(spec.num_features, spec.hidden, spec.num_classes,
                                        spec.lambda);
    case TaskKind::kCnnMnist:
      if (spec.num_features != 784 || spec.num_classes != 10) {
        throw ConfigError("cnn_mnist_optional needs 28x28 inputs and 10 classes");
      }
      return std::make_unique<CnnMnist>(spec.lambda);
  }
  throw ConfigError("unknown task kind");
}

std::size_t model_dim(const ModelSpec& spec) { return make_model(spec)->dim(); }

double full_loss(const Model& m, std::span<const double> w, const Dataset& data) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return m.loss_grad(w, data, all, {});
}

std::vector<double> full_gradient(const Model& m, std::span<const double> w, const Dataset& data) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<double> g(m.dim());
  m.loss_grad(w, data, all, g);
  return g;
}

}  // namespace airbreathe
