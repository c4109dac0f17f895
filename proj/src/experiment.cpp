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

#include "airbreathe/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <thread>

#include "airbreathe/error.hpp"

namespace airbreathe {

std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kIdeal: return "ideal";
    case SchemeKind::kNoSb: return "no_sb";
    case SchemeKind::kPruneOnly: return "prune_only";
    case SchemeKind::kFixedBd: return "fixed_bd";
    case SchemeKind::kFixedBdOracle: return "fixed_bd_oracle";
    case SchemeKind::kAdaptiveBd: return "adaptive_bd";
  }
  return "unknown";
}

SchemeKind scheme_from_string(std::string_view name) {
  for (auto k : {SchemeKind::kIdeal, SchemeKind::kNoSb, SchemeKind::kPruneOnly,
                 SchemeKind::kFixedBd, SchemeKind::kFixedBdOracle, SchemeKind::kAdaptiveBd}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown scheme: " + std::string(name));
}

std::string_view to_string(DataSource s) {
  switch (s) {
    case DataSource::kMixture: return "mixture";
    case DataSource::kCloud: return "cloud";
    case DataSource::kCsv: return "csv";
    case DataSource::kMnist: return "mnist";
  }
  return "unknown";
}

DataSource data_source_from_string(std::string_view name) {
  for (auto s : {DataSource::kMixture, DataSource::kCloud, DataSource::kCsv, DataSource::kMnist}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown data source: " + std::string(name));
}

void ExperimentConfig::validate() const {
  task.validate();
  if (rounds == 0) throw ConfigError("rounds must be >= 1");
  if (trials == 0) throw ConfigError("trials must be >= 1");
  if (num_devices == 0) throw ConfigError("need at least one device");
  if (g_th < 0) throw ConfigError("g_th must be >= 0");
  if (p_i < 0) throw ConfigError("interference power must be >= 0");
  if (!std::isfinite(sir_db)) throw ConfigError("sir_db must be finite");
  if (eval_every == 0) throw ConfigError("eval_every must be >= 1");
  if (scheme.kind == SchemeKind::kPruneOnly && !(scheme.gamma > 0 && scheme.gamma <= 1)) {
    throw ConfigError("prune_only gamma must lie in (0, 1]");
  }
  if (data.source == DataSource::kMixture || data.source == DataSource::kCloud) {
    if (data.mixture.samples < num_devices) throw ConfigError("fewer samples than devices");
  }
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) {
  return derive_seed(master, Stream::kMonteCarlo, trial, 0x7472);
}

namespace {

Dataset load_source(const DataSpec& spec, bool validation, Rng& rng) {
  switch (spec.source) {
    case DataSource::kMixture: {
      MixtureSpec m = spec.mixture;
      if (validation) m.samples = spec.validation_samples;
      return make_gaussian_mixture(m, rng);
    }
    case DataSource::kCloud:
      return make_gaussian_cloud(validation ? spec.validation_samples : spec.mixture.samples,
                                 spec.mixture.features, spec.cloud_center, spec.cloud_spread, rng);
    case DataSource::kCsv:
      return load_csv(validation ? spec.validation_path : spec.train_path);
    case DataSource::kMnist:
      return validation ? load_mnist_idx(spec.validation_path, spec.validation_labels_path, spec.limit)
                        : load_mnist_idx(spec.train_path, spec.train_labels_path, spec.limit);
  }
  throw ConfigError("unknown data source");
}

}  // namespace

TrialData build_trial_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrialData td;
  Rng data_rng = make_stream(seed, Stream::kData);
  Rng val_rng = make_stream(seed, Stream::kValidation);
  td.train = load_source(cfg.data, false, data_rng);
  bool holdout = cfg.data.source == DataSource::kCsv && cfg.data.validation_path.empty();
  if (holdout) {
    std::vector<std::size_t> order(td.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), val_rng);
    std::size_t cut = order.size() - order.size() / 5;
    std::vector<std::size_t> tr(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
    std::vector<std::size_t> va(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
    td.validation = td.train.subset(va);
    td.train = td.train.subset(tr);
  } else {
    td.validation = load_source(cfg.data, true, val_rng);
  }
  td.validation.num_classes = std::max(td.validation.num_classes, td.train.num_classes);
  td.train.num_classes = td.validation.num_classes;
  Rng part_rng = make_stream(seed, Stream::kPartition);
  td.shards = partition(td.train, cfg.num_devices, cfg.partition, part_rng);
  return td;
}

Simulator::Simulator(const ExperimentConfig& cfg, std::size_t trial)
    : Simulator(cfg, trial, build_trial_data(cfg, trial_seed(cfg.master_seed, trial))) {}

Simulator::Simulator(const ExperimentConfig& cfg, std::size_t trial, TrialData data)
    : cfg_(cfg),
      trial_(trial),
      seed_(trial_seed(cfg.master_seed, trial)),
      data_(std::move(data)),
      model_(make_model(model_spec_for(cfg.task, data_.train))),
      prunable_(model_->prunable()),
      ledger_(cfg.num_devices, cfg.power_budget),
      chan_rng_(make_stream(seed_, Stream::kChannel)),
      mask_rng_(make_stream(seed_, Stream::kMask)),
      intf_rng_(make_stream(seed_, Stream::kInterference)) {
  cfg_.validate();
  for (const auto& s : data_.shards) {
    if (s.samples.size() < cfg_.task.batch_size) throw ConfigError("shard smaller than batch size");
  }
  Rng init_rng = make_stream(seed_, Stream::kInit);
  state_.w = model_->init(init_rng);
  state_.prunable = model_->prunable();
  sir_ = SirConfig::from_sir_db(cfg_.sir_db, cfg_.num_devices, cfg_.g_th, model_->dim(), cfg_.p_i);
  sir_.validate();
  if (cfg_.scheme.kind == SchemeKind::kFixedBd) static_depth_ = fixed_depth(sir_).g;
  if (cfg_.scheme.kind == SchemeKind::kFixedBdOracle) static_depth_ = scan_fixed_depth(sir_).g;
  if (cfg_.depth_override > 0) static_depth_ = std::min(cfg_.depth_override, model_->dim());
  last_eval_ = evaluate(state_, data_.validation, *model_);
}

std::size_t Simulator::choose_depth(const GsiEstimate& gsi, std::size_t active) const {
  if (cfg_.depth_override > 0) return static_depth_;
  switch (cfg_.scheme.kind) {
    case SchemeKind::kFixedBd:
    case SchemeKind::kFixedBdOracle: return static_depth_;
    case SchemeKind::kAdaptiveBd: return adaptive_depth(gsi, active, sir_).g;
    default: return 1;
  }
}

RoundTelemetry Simulator::run_round() {
  const std::size_t round = ledger_.rounds();
  const std::size_t k_total = cfg_.num_devices;
  const std::size_t d = model_->dim();
  RoundTelemetry t;
  t.trial = trial_;
  t.round = round;

  std::vector<GradientVector> grads;
  grads.reserve(k_total);
  for (std::size_t k = 0; k < k_total; ++k) {
    Rng batch_rng = make_stream(seed_, Stream::kBatch, k, round);
    grads.push_back(local_gradient(state_, data_.shards[k], *model_, cfg_.task.batch_size, batch_rng));
  }
  // Spread of device gradients around their mean, an estimate of sigma_g^2.
  GradientVector all_mean = ideal_aggregate(grads);
  double sigma_g_sq = 0.0;
  if (k_total > 1) {
    for (const auto& g : grads) {
      for (std::size_t i = 0; i < d; ++i) {
        double e = g.values[i] - all_mean.values[i];
        sigma_g_sq += e * e;
      }
    }
    sigma_g_sq /= static_cast<double>(k_total - 1);
  }

  bool evaluate_now = (round + 1) % cfg_.eval_every == 0 || round + 1 == cfg_.rounds;
  auto finish = [&](bool updated) {
    if (updated && evaluate_now) last_eval_ = evaluate(state_, data_.validation, *model_);
    t.loss = last_eval_.loss;
    t.accuracy = last_eval_.accuracy;
    t.cumulative_chips = chips_;
    ledger_.end_round();
    return t;
  };

  if (cfg_.scheme.kind == SchemeKind::kIdeal) {
    GsiEstimate gsi = estimate_gsi(std::span<const GradientVector>(grads));
    t.g_depth = 1;
    t.s_n = d;
    t.gamma_eff = 1.0;
    t.active_count = k_total;
    t.alpha_sq_hat = gsi.alpha_sq;
    t.v_sq_hat = gsi.v_sq;
    last_target_ = all_mean;
    last_update_ = all_mean;
    apply_update_inplace(state_, all_mean, cfg_.task.eta);
    chips_ += d;
    return finish(true);
  }

  ChannelRealization chan = draw_channels(k_total, cfg_.g_th, sir_.p0, chan_rng_);
  const std::size_t active = chan.active_count();
  t.active_count = active;
  if (active == 0) {
    t.skipped = true;
    t.g_depth = static_depth_;
    t.s_n = 0;
    t.gamma_eff = 0.0;
    return finish(false);
  }

  std::vector<GradientVector> act;
  act.reserve(active);
  for (std::size_t k : chan.active_indices()) act.push_back(grads[k]);
  GsiEstimate gsi = estimate_gsi(std::span<const GradientVector>(act));
  t.alpha_sq_hat = gsi.alpha_sq;
  t.v_sq_hat = gsi.v_sq;

  const std::size_t g = choose_depth(gsi, active);
  std::size_t from_pool;
  if (cfg_.scheme.kind == SchemeKind::kPruneOnly) {
    from_pool = prunable_.mask_size_for_ratio(cfg_.scheme.gamma) - prunable_.fixed_count();
  } else {
    std::size_t s = prunable_.mask_size_for_depth(g);
    from_pool = std::min(s > prunable_.fixed_count() ? s - prunable_.fixed_count() : 0,
                         prunable_.prunable_count());
  }
  PruningMask mask = prunable_.draw(from_pool, mask_rng_);
  const std::size_t s_n = mask.size();
  t.g_depth = g;
  t.s_n = s_n;
  t.gamma_eff = prunable_.prunable_count() > 0
                    ? static_cast<double>(from_pool) / static_cast<double>(prunable_.prunable_count())
                    : 1.0;

  NormalizationParams norm{gsi.mean, std::sqrt(gsi.v_sq)};
  if (norm.std <= kSigmaFloor) {
    norm = {0.0, 1.0};
    ++degenerate_;
  }
  PNSequenceSet pn = PNSequenceSet::generate(s_n, g, derive_seed(seed_, Stream::kPn, round));
  std::vector<std::vector<double>> chips(k_total);
  for (std::size_t k = 0; k < k_total; ++k) {
    if (chan.active[k]) chips[k] = transmit_chain(grads[k], mask, norm, pn);
  }
  double before = std::accumulate(ledger_.energy().begin(), ledger_.energy().end(), 0.0);
  ChipFrame frame = transmit_round(chips, chan, InterferenceProfile{cfg_.p_i}, intf_rng_, &ledger_);
  t.power_spent = std::accumulate(ledger_.energy().begin(), ledger_.energy().end(), 0.0) - before;
  GradientVector y = receive_chain(frame, pn, norm, active, sir_.p0, mask);

  GradientVector target = ideal_aggregate(act);
  double err = 0.0, alpha_prunable = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double e = y.values[i] - target.values[i];
    err += e * e;
    if (prunable_.is_prunable(i)) alpha_prunable += target.values[i] * target.values[i];
  }
  t.mse_empirical = err;
  double a = static_cast<double>(active);
  t.mse_closed_form = (1.0 - t.gamma_eff) * alpha_prunable +
                      static_cast<double>(s_n) * sir_.p_i * norm.std * norm.std /
                          (static_cast<double>(g) * sir_.p0 * a * a);
  t.u_n = propagation_loss(t.mse_closed_form, k_total, sir_.xi_a, sigma_g_sq, cfg_.u_form);

  last_target_ = std::move(target);
  last_update_ = y;
  apply_update_inplace(state_, y, cfg_.task.eta);
  chips_ += static_cast<std::uint64_t>(s_n) * g;
  return finish(true);
}

std::size_t thread_cap() {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("AIRBREATHE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) cap = std::min(cap, static_cast<std::size_t>(v));
  }
  return cap;
}

namespace {

std::pair<std::vector<RoundTelemetry>, TrialSummary> run_trial(const ExperimentConfig& cfg,
                                                                std::size_t trial) {
  Simulator sim(cfg, trial);
  std::vector<RoundTelemetry> rows;
  rows.reserve(cfg.rounds);
  TrialSummary s;
  s.trial = trial;
  double depth_sum = 0.0;
  std::size_t depth_rounds = 0;
  for (std::size_t n = 0; n < cfg.rounds; ++n) {
    RoundTelemetry t = sim.run_round();
    if (t.skipped) {
      ++s.skipped_rounds;
    } else {
      depth_sum += static_cast<double>(t.g_depth);
      ++depth_rounds;
    }
    s.best_accuracy = std::max(s.best_accuracy, t.accuracy);
    rows.push_back(t);
  }
  s.final_loss = rows.back().loss;
  s.final_accuracy = rows.back().accuracy;
  s.total_chips = rows.back().cumulative_chips;
  s.degenerate_rounds = sim.degenerate_rounds();
  s.mean_depth = depth_rounds ? depth_sum / static_cast<double>(depth_rounds) : 0.0;
  PowerAudit audit = audit_power(sim.ledger());
  s.mean_energy = audit.mean_energy;
  s.devices_over_budget = audit.devices_over_budget;
  return {std::move(rows), s};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<std::vector<RoundTelemetry>, TrialSummary>> out(cfg.trials);
  std::size_t workers = std::min(thread_cap(), cfg.trials);
  if (workers <= 1) {
    for (std::size_t t = 0; t < cfg.trials; ++t) out[t] = run_trial(cfg, t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = next++; t < cfg.trials; t = next++) out[t] = run_trial(cfg, t);
        } catch (...) {
          errors[w] = std::current_exception();
          next = cfg.trials;
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  ExperimentResult r;
  r.rows.reserve(cfg.trials * cfg.rounds);
  for (auto& [rows, summary] : out) {
    r.rows.insert(r.rows.end(), rows.begin(), rows.end());
    r.trials.push_back(summary);
  }
  return r;
}

}  // namespace airbreathe
