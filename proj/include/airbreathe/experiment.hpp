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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "airbreathe/analysis.hpp"
#include "airbreathe/breathing.hpp"
#include "airbreathe/channel.hpp"
#include "airbreathe/dataset.hpp"
#include "airbreathe/learning.hpp"
#include "airbreathe/models.hpp"

namespace airbreathe {

enum class SchemeKind { kIdeal, kNoSb, kPruneOnly, kFixedBd, kFixedBdOracle, kAdaptiveBd };

std::string_view to_string(SchemeKind kind);
SchemeKind scheme_from_string(std::string_view name);

struct Scheme {
  SchemeKind kind = SchemeKind::kAdaptiveBd;
  double gamma = 0.1;  // prune_only
};

enum class DataSource { kMixture, kCloud, kCsv, kMnist };

std::string_view to_string(DataSource s);
DataSource data_source_from_string(std::string_view name);

struct DataSpec {
  DataSource source = DataSource::kMixture;
  MixtureSpec mixture;                   // kMixture; samples = training set size
  std::size_t validation_samples = 2000;  // synthetic sources
  double cloud_center = 1.0;             // kCloud
  double cloud_spread = 1.0;
  // kCsv reads train_path and validation_path; an empty validation_path holds
  // out the last fifth of the shuffled training rows. kMnist also reads the
  // two label files.
  std::string train_path;
  std::string train_labels_path;
  std::string validation_path;
  std::string validation_labels_path;
  std::size_t limit = 0;  // kMnist row cap
};

struct ExperimentConfig {
  std::string name = "run";
  Scheme scheme;
  TaskSpec task;
  DataSpec data;
  PartitionSpec partition;
  std::size_t num_devices = 10;
  std::size_t rounds = 400;
  double sir_db = -23.0;
  double g_th = 0.2;
  double p_i = 1.0;
  std::uint64_t master_seed = 1;
  std::size_t trials = 1;
  // Forces the breathing depth of the breathing schemes when nonzero.
  std::size_t depth_override = 0;
  PropagationForm u_form = PropagationForm::kMainText;
  double power_budget = 0.0;  // per-device energy; 0 disables the fraction report
  std::size_t eval_every = 1;
  std::string output_csv;
  std::string output_summary;

  void validate() const;
};

struct RoundTelemetry {
  std::size_t trial = 0;
  std::size_t round = 0;
  bool skipped = false;
  std::size_t g_depth = 1;
  std::size_t s_n = 0;
  double gamma_eff = 1.0;
  std::size_t active_count = 0;
  double alpha_sq_hat = 0.0;
  double v_sq_hat = 0.0;
  double mse_empirical = 0.0;
  double mse_closed_form = 0.0;
  double u_n = 0.0;
  double loss = 0.0;
  double accuracy = 0.0;
  std::uint64_t cumulative_chips = 0;
  double power_spent = 0.0;
};

struct TrialData {
  Dataset train;
  Dataset validation;
  std::vector<DeviceShard> shards;
};

// Builds the datasets and device shards of one trial.
TrialData build_trial_data(const ExperimentConfig& cfg, std::uint64_t trial_seed);

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial);

// One trial of the round loop.
class Simulator {
 public:
  Simulator(const ExperimentConfig& cfg, std::size_t trial);
  Simulator(const ExperimentConfig& cfg, std::size_t trial, TrialData data);

  RoundTelemetry run_round();

  const ModelState& state() const { return state_; }
  ModelState& mutable_state() { return state_; }
  const Model& model() const { return *model_; }
  const SirConfig& sir() const { return sir_; }
  const TrialData& data() const { return data_; }
  const PowerLedger& ledger() const { return ledger_; }
  std::size_t degenerate_rounds() const { return degenerate_; }
  // The depth a fixed scheme uses; 1 for the others.
  std::size_t static_depth() const { return static_depth_; }

  // Ground-truth target of the last executed round (mean of active gradients).
  const GradientVector& last_target() const { return last_target_; }
  const GradientVector& last_update() const { return last_update_; }

 private:
  std::size_t choose_depth(const GsiEstimate& gsi, std::size_t active) const;

  ExperimentConfig cfg_;
  std::size_t trial_;
  std::uint64_t seed_;
  TrialData data_;
  std::unique_ptr<Model> model_;
  ModelState state_;
  SirConfig sir_;
  PrunableSet prunable_;
  PowerLedger ledger_;
  Rng chan_rng_;
  Rng mask_rng_;
  Rng intf_rng_;
  std::size_t static_depth_ = 1;
  std::size_t degenerate_ = 0;
  std::uint64_t chips_ = 0;
  Evaluation last_eval_;
  GradientVector last_target_;
  GradientVector last_update_;
};

struct TrialSummary {
  std::size_t trial = 0;
  double final_loss = 0.0;
  double final_accuracy = 0.0;
  double best_accuracy = 0.0;
  std::size_t skipped_rounds = 0;
  std::size_t degenerate_rounds = 0;
  double mean_depth = 0.0;
  std::uint64_t total_chips = 0;
  double mean_energy = 0.0;
  std::size_t devices_over_budget = 0;
};

struct ExperimentResult {
  std::vector<RoundTelemetry> rows;  // ordered by trial, then round
  std::vector<TrialSummary> trials;
};

std::size_t thread_cap();

ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace airbreathe
