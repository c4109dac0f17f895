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

#include "airbreathe/telemetry_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "airbreathe/config.hpp"
#include "airbreathe/error.hpp"

namespace airbreathe {

const std::vector<std::string>& telemetry_columns() {
  static const std::vector<std::string> cols = {
      "trial",          "round",           "skipped",   "g_depth",  "s_n",
      "gamma_eff",      "active_count",    "alpha_sq_hat", "v_sq_hat", "mse_empirical",
      "mse_closed_form", "u_n",            "loss",      "accuracy", "cumulative_chips",
      "power_spent"};
  return cols;
}

std::string telemetry_header() {
  std::string h;
  for (const auto& c : telemetry_columns()) {
    if (!h.empty()) h += ',';
    h += c;
  }
  return h;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string format_row(const RoundTelemetry& t) {
  std::string s;
  s += std::to_string(t.trial) + ',' + std::to_string(t.round) + ',' + (t.skipped ? "1" : "0") +
       ',' + std::to_string(t.g_depth) + ',' + std::to_string(t.s_n) + ',' + fmt(t.gamma_eff) +
       ',' + std::to_string(t.active_count) + ',' + fmt(t.alpha_sq_hat) + ',' + fmt(t.v_sq_hat) +
       ',' + fmt(t.mse_empirical) + ',' + fmt(t.mse_closed_form) + ',' + fmt(t.u_n) + ',' +
       fmt(t.loss) + ',' + fmt(t.accuracy) + ',' + std::to_string(t.cumulative_chips) + ',' +
       fmt(t.power_spent);
  return s;
}

void ensure_writable(const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
}

void write_telemetry_csv(const std::string& path, const std::vector<RoundTelemetry>& rows) {
  ensure_writable(path);
  std::ofstream out(path, std::ios::trunc);
  out << telemetry_header() << '\n';
  for (const auto& r : rows) out << format_row(r) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::vector<RoundTelemetry> read_telemetry_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != telemetry_header()) {
    throw ConfigError("telemetry schema mismatch in " + path);
  }
  std::vector<RoundTelemetry> rows;
  const std::size_t ncol = telemetry_columns().size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (cells.size() != ncol) throw ConfigError("telemetry row has wrong column count in " + path);
    try {
      RoundTelemetry t;
      t.trial = std::stoull(cells[0]);
      t.round = std::stoull(cells[1]);
      t.skipped = cells[2] == "1";
      t.g_depth = std::stoull(cells[3]);
      t.s_n = std::stoull(cells[4]);
      t.gamma_eff = std::stod(cells[5]);
      t.active_count = std::stoull(cells[6]);
      t.alpha_sq_hat = std::stod(cells[7]);
      t.v_sq_hat = std::stod(cells[8]);
      t.mse_empirical = std::stod(cells[9]);
      t.mse_closed_form = std::stod(cells[10]);
      t.u_n = std::stod(cells[11]);
      t.loss = std::stod(cells[12]);
      t.accuracy = std::stod(cells[13]);
      t.cumulative_chips = std::stoull(cells[14]);
      t.power_spent = std::stod(cells[15]);
      rows.push_back(t);
    } catch (const std::exception&) {
      throw ConfigError("malformed telemetry row in " + path);
    }
  }
  return rows;
}

std::string summary_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  Json j;
  j["config"] = config_to_json(cfg);
  Json trials = Json::array();
  double fl = 0, fa = 0, ba = 0, md = 0;
  std::size_t skipped = 0;
  for (const auto& t : result.trials) {
    trials.push_back({{"trial", t.trial},
                      {"final_loss", t.final_loss},
                      {"final_accuracy", t.final_accuracy},
                      {"best_accuracy", t.best_accuracy},
                      {"skipped_rounds", t.skipped_rounds},
                      {"degenerate_rounds", t.degenerate_rounds},
                      {"mean_depth", t.mean_depth},
                      {"total_chips", t.total_chips},
                      {"mean_energy", t.mean_energy},
                      {"devices_over_budget", t.devices_over_budget}});
    fl += t.final_loss;
    fa += t.final_accuracy;
    ba += t.best_accuracy;
    md += t.mean_depth;
    skipped += t.skipped_rounds;
  }
  double n = result.trials.empty() ? 1.0 : static_cast<double>(result.trials.size());
  j["trials"] = trials;
  j["aggregate"] = {{"final_loss_mean", fl / n},
                    {"final_accuracy_mean", fa / n},
                    {"best_accuracy_mean", ba / n},
                    {"mean_depth", md / n},
                    {"skipped_rounds", skipped}};
  return j.dump(2) + "\n";
}

void write_summary(const std::string& path, const ExperimentConfig& cfg,
                   const ExperimentResult& result) {
  ensure_writable(path);
  std::ofstream out(path, std::ios::trunc);
  out << summary_json(cfg, result);
  if (!out) throw IoError("write failed: " + path);
}

std::vector<PlotSeries> align_series(
    const std::vector<std::pair<std::string, std::vector<RoundTelemetry>>>& tables,
    std::size_t max_points) {
  if (tables.empty()) throw ConfigError("no telemetry tables");
  std::vector<double> grid;
  for (const auto& [name, rows] : tables) {
    if (rows.empty()) throw ConfigError("empty telemetry table: " + name);
    for (const auto& r : rows) grid.push_back(static_cast<double>(r.cumulative_chips));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (max_points > 1 && grid.size() > max_points) {
    std::vector<double> thin;
    for (std::size_t i = 0; i < max_points; ++i) {
      thin.push_back(grid[i * (grid.size() - 1) / (max_points - 1)]);
    }
    grid = std::move(thin);
  }

  std::vector<PlotSeries> out;
  for (const auto& [name, rows] : tables) {
    std::map<std::size_t, std::vector<const RoundTelemetry*>> by_trial;
    for (const auto& r : rows) by_trial[r.trial].push_back(&r);
    PlotSeries s;
    s.name = name;
    s.points.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) s.points[i].chips = grid[i];
    for (auto& [trial, trows] : by_trial) {
      std::sort(trows.begin(), trows.end(),
                [](auto* a, auto* b) { return a->round < b->round; });
      std::size_t at = 0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        while (at + 1 < trows.size() &&
               static_cast<double>(trows[at + 1]->cumulative_chips) <= grid[i]) {
          ++at;
        }
        s.points[i].accuracy += trows[at]->accuracy;
        s.points[i].loss += trows[at]->loss;
      }
    }
    double nt = static_cast<double>(by_trial.size());
    for (auto& p : s.points) {
      p.accuracy /= nt;
      p.loss /= nt;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> emit_plot_data(
    const std::vector<std::pair<std::string, std::vector<RoundTelemetry>>>& tables,
    const std::string& out_dir, std::size_t max_points) {
  auto series = align_series(tables, max_points);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::vector<std::string> paths;
  for (const auto& s : series) {
    std::string path = (std::filesystem::path(out_dir) / (s.name + ".csv")).string();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << "cumulative_chips,accuracy,loss\n";
    for (const auto& p : s.points) {
      out << fmt(p.chips) << ',' << fmt(p.accuracy) << ',' << fmt(p.loss) << '\n';
    }
    paths.push_back(path);
  }
  return paths;
}

}  // namespace airbreathe
