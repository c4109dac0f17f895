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

// Command-line front end: run, sweep, verify, plotdata.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "acceptance/criteria.hpp"
#include "airbreathe/config.hpp"
#include "airbreathe/error.hpp"
#include "airbreathe/experiment.hpp"
#include "airbreathe/telemetry_io.hpp"

namespace ab = airbreathe;

namespace {

struct Aggregate {
  double loss = 0, accuracy = 0, depth = 0, chips = 0, skipped = 0;
};

Aggregate aggregate(const ab::ExperimentResult& res) {
  Aggregate a;
  if (res.trials.empty()) return a;
  for (const auto& t : res.trials) {
    a.loss += t.final_loss;
    a.accuracy += t.final_accuracy;
    a.depth += t.mean_depth;
    a.chips += static_cast<double>(t.total_chips);
    a.skipped += static_cast<double>(t.skipped_rounds);
  }
  const double n = static_cast<double>(res.trials.size());
  a.loss /= n;
  a.accuracy /= n;
  a.depth /= n;
  a.chips /= n;
  a.skipped /= n;
  return a;
}

int cmd_run(const std::string& path, const std::vector<std::string>& overrides,
            std::optional<std::uint64_t> seed, const std::string& csv, const std::string& summary) {
  ab::ExperimentConfig cfg = ab::load_config(path, overrides);
  if (seed) cfg.master_seed = *seed;
  if (!csv.empty()) cfg.output_csv = csv;
  if (!summary.empty()) cfg.output_summary = summary;
  cfg.validate();
  // Fail on unwritable outputs before spending time on the simulation.
  if (!cfg.output_csv.empty()) ab::ensure_writable(cfg.output_csv);
  if (!cfg.output_summary.empty()) ab::ensure_writable(cfg.output_summary);

  ab::ExperimentResult res = ab::run_experiment(cfg);
  if (!cfg.output_csv.empty()) ab::write_telemetry_csv(cfg.output_csv, res.rows);
  if (!cfg.output_summary.empty()) {
    ab::write_summary(cfg.output_summary, cfg, res);
  } else {
    std::cout << ab::summary_json(cfg, res) << "\n";
  }
  Aggregate a = aggregate(res);
  std::fprintf(stderr, "%s: %zu trial(s), final loss %.5f, accuracy %.4f, mean depth %.2f\n",
               cfg.name.c_str(), res.trials.size(), a.loss, a.accuracy, a.depth);
  return 0;
}

int cmd_sweep(const std::string& path, const std::vector<std::string>& overrides,
              std::vector<double> sir, std::vector<std::size_t> devices,
              std::vector<std::size_t> depths, const std::string& out) {
  ab::ExperimentConfig base = ab::load_config(path, overrides);
  base.output_csv.clear();
  base.output_summary.clear();
  if (sir.empty()) sir = {base.sir_db};
  if (devices.empty()) devices = {base.num_devices};
  if (depths.empty()) depths = {base.depth_override};

  std::ofstream file;
  if (!out.empty()) {
    ab::ensure_writable(out);
    file.open(out);
  }
  std::ostream& os = out.empty() ? std::cout : file;
  os << "scheme,sir_db,devices,depth_override,trials,final_loss,final_accuracy,mean_depth,"
        "total_chips,skipped_rounds\n";
  for (double s : sir) {
    for (std::size_t k : devices) {
      for (std::size_t g : depths) {
        ab::ExperimentConfig cfg = base;
        cfg.sir_db = s;
        cfg.num_devices = k;
        cfg.depth_override = g;
        cfg.validate();
        Aggregate a = aggregate(ab::run_experiment(cfg));
        char line[256];
        std::snprintf(line, sizeof line, "%s,%.9g,%zu,%zu,%zu,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      std::string(ab::to_string(cfg.scheme.kind)).c_str(), s, k, g, cfg.trials,
                      a.loss, a.accuracy, a.depth, a.chips, a.skipped);
        os << line << std::flush;
      }
    }
  }
  return 0;
}

int cmd_plotdata(const std::vector<std::string>& inputs, const std::string& out_dir,
                 std::size_t max_points) {
  std::vector<std::pair<std::string, std::vector<ab::RoundTelemetry>>> tables;
  for (const auto& in : inputs) {
    tables.emplace_back(std::filesystem::path(in).stem().string(), ab::read_telemetry_csv(in));
  }
  std::filesystem::create_directories(out_dir);
  for (const auto& p : ab::emit_plot_data(tables, out_dir, max_points)) std::cout << p << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrum-breathing over-the-air federated learning simulator"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string csv, summary;
  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("config", config, "JSON config file")->required();
  run->add_option("--seed", seed, "Master seed (overrides the config)");
  run->add_option("--override,-o", overrides, "key.path=value, repeatable");
  run->add_option("--csv", csv, "Per-round telemetry CSV path");
  run->add_option("--summary", summary, "Summary JSON path (stdout when unset)");

  std::vector<double> sir;
  std::vector<std::size_t> devices, depths;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Grid over SIR, device count and depth");
  sweep->add_option("config", config, "JSON config file")->required();
  sweep->add_option("--override,-o", overrides, "key.path=value, repeatable");
  sweep->add_option("--sir-db", sir, "SIR values in dB")->delimiter(',');
  sweep->add_option("--devices", devices, "Device counts")->delimiter(',');
  sweep->add_option("--depth", depths, "Forced depths (0 = scheme choice)")->delimiter(',');
  sweep->add_option("--out", sweep_out, "Sweep CSV path (stdout when unset)");

  std::vector<int> only;
  bool quiet = false;
  auto* verify = app.add_subcommand("verify", "Run the oracle and acceptance checks");
  verify->add_option("--only", only, "Criterion ids")->delimiter(',');
  verify->add_flag("--quiet", quiet, "Print detail only for failures");

  std::vector<std::string> inputs;
  std::string out_dir = ".";
  std::size_t max_points = 0;
  auto* plot = app.add_subcommand("plotdata", "Align telemetry CSVs on cumulative chips");
  plot->add_option("inputs", inputs, "Telemetry CSV files, one per scheme")->required();
  plot->add_option("--out-dir", out_dir, "Output directory");
  plot->add_option("--max-points", max_points, "Thin the grid to at most this many points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config, overrides, seed, csv, summary);
    if (*sweep) return cmd_sweep(config, overrides, sir, devices, depths, sweep_out);
    if (*verify) return ab::acceptance::run_and_report(only, !quiet) == 0 ? 0 : 2;
    if (*plot) return cmd_plotdata(inputs, out_dir, max_points);
  } catch (const ab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
