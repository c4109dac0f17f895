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

#include <string>
#include <utility>
#include <vector>

#include "airbreathe/experiment.hpp"

namespace airbreathe {

// Column order of the telemetry CSV.
const std::vector<std::string>& telemetry_columns();

std::string telemetry_header();
std::string format_row(const RoundTelemetry& t);

void write_telemetry_csv(const std::string& path, const std::vector<RoundTelemetry>& rows);
// Throws ConfigError on a header that does not match telemetry_columns().
std::vector<RoundTelemetry> read_telemetry_csv(const std::string& path);

// Structured text: config echo, per-trial and aggregated final/best metrics.
std::string summary_json(const ExperimentConfig& cfg, const ExperimentResult& result);
void write_summary(const std::string& path, const ExperimentConfig& cfg,
                   const ExperimentResult& result);

// Opens (and truncates) the path for writing; throws IoError on failure.
void ensure_writable(const std::string& path);

struct PlotPoint {
  double chips = 0.0;
  double accuracy = 0.0;
  double loss = 0.0;
};

struct PlotSeries {
  std::string name;
  std::vector<PlotPoint> points;
};

// Every table is averaged over its trials on a shared chip grid. Values are
// step-interpolated: the latest row with cumulative_chips <= x holds, so
// skipped rounds carry the previous accuracy forward.
std::vector<PlotSeries> align_series(
    const std::vector<std::pair<std::string, std::vector<RoundTelemetry>>>& tables,
    std::size_t max_points = 0);

// One <name>.csv per series in out_dir. Returns the written paths.
std::vector<std::string> emit_plot_data(
    const std::vector<std::pair<std::string, std::vector<RoundTelemetry>>>& tables,
    const std::string& out_dir, std::size_t max_points = 0);

}  // namespace airbreathe
