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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "airbreathe/breathing.hpp"
#include "airbreathe/config.hpp"
#include "airbreathe/error.hpp"
#include "airbreathe/experiment.hpp"
#include "airbreathe/telemetry_io.hpp"
#include "oracles/oracles.hpp"

using namespace airbreathe;

namespace {

// Desk task shrunk so each simulation takes milliseconds.
ExperimentConfig tiny(SchemeKind scheme) {
  ExperimentConfig c;
  c.scheme.kind = scheme;
  c.data.mixture.samples = 400;
  c.data.mixture.features = 31;
  c.data.validation_samples = 200;
  c.rounds = 30;
  c.master_seed = 17;
  return c;
}

std::vector<RoundTelemetry> run_rows(const ExperimentConfig& c) { return run_experiment(c).rows; }

bool same_rows(const std::vector<RoundTelemetry>& a, const std::vector<RoundTelemetry>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (format_row(a[i]) != format_row(b[i])) return false;
  return true;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path tmp(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("airbreathe_unit_" + name);
}

}  // namespace

TEST_CASE("scheme names round trip") {
  for (auto s : {SchemeKind::kIdeal, SchemeKind::kNoSb, SchemeKind::kPruneOnly, SchemeKind::kFixedBd,
                 SchemeKind::kFixedBdOracle, SchemeKind::kAdaptiveBd})
    CHECK(scheme_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(scheme_from_string("magic"), ConfigError);
}

TEST_CASE("config validation") {
  auto c = tiny(SchemeKind::kPruneOnly);
  c.scheme.gamma = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = tiny(SchemeKind::kNoSb);
  c.rounds = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = tiny(SchemeKind::kNoSb);
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("ideal round decreases the loss") {
  auto c = tiny(SchemeKind::kIdeal);
  c.task.eta = 0.05;
  c.task.init_scale = 1.0;
  Simulator sim(c, 0);
  const auto& m = sim.model();
  double before = full_loss(m, sim.state().w, sim.data().train);
  auto t = sim.run_round();
  CHECK_FALSE(t.skipped);
  CHECK(full_loss(m, sim.state().w, sim.data().train) < before);
  CHECK(t.cumulative_chips == m.dim());
}

TEST_CASE("no_sb equals adaptive forced to depth one") {
  auto a = tiny(SchemeKind::kNoSb);
  auto b = tiny(SchemeKind::kAdaptiveBd);
  b.depth_override = 1;
  CHECK(same_rows(run_rows(a), run_rows(b)));
}

TEST_CASE("fixed_bd at high SIR equals no_sb") {
  auto a = tiny(SchemeKind::kNoSb);
  auto b = tiny(SchemeKind::kFixedBd);
  a.sir_db = b.sir_db = 30.0;
  Simulator probe(b, 0);
  REQUIRE(probe.static_depth() == 1);
  CHECK(same_rows(run_rows(a), run_rows(b)));
}

TEST_CASE("prune_only with gamma one equals no_sb") {
  auto a = tiny(SchemeKind::kNoSb);
  auto b = tiny(SchemeKind::kPruneOnly);
  b.scheme.gamma = 1.0;
  CHECK(same_rows(run_rows(a), run_rows(b)));
}

TEST_CASE("adaptive without interference breathes at depth one") {
  auto c = tiny(SchemeKind::kAdaptiveBd);
  c.p_i = 0.0;
  for (const auto& r : run_rows(c))
    if (!r.skipped) CHECK(r.g_depth == 1);
}

TEST_CASE("adaptive depth is the per-round brute-force argmin") {
  auto c = tiny(SchemeKind::kAdaptiveBd);
  c.rounds = 40;
  Simulator sim(c, 0);
  const auto& cfg = sim.sir();
  for (std::size_t n = 0; n < c.rounds; ++n) {
    auto t = sim.run_round();
    if (t.skipped) continue;
    GsiEstimate gsi;
    gsi.alpha_sq = t.alpha_sq_hat;
    gsi.v_sq = t.v_sq_hat;
    auto ref = oracle::brute_force_argmin(
        [&](std::size_t g) { return beta_adaptive(g, gsi, t.active_count, cfg); }, cfg.d);
    CHECK(t.g_depth == ref);
  }
}

TEST_CASE("fixed schemes agree between closed form and scan") {
  Simulator a(tiny(SchemeKind::kFixedBd), 0), b(tiny(SchemeKind::kFixedBdOracle), 0);
  CHECK(a.static_depth() == b.static_depth());
  CHECK(a.static_depth() > 1);
}

TEST_CASE("telemetry invariants") {
  for (auto s : {SchemeKind::kIdeal, SchemeKind::kNoSb, SchemeKind::kPruneOnly, SchemeKind::kFixedBd,
                 SchemeKind::kAdaptiveBd}) {
    auto c = tiny(s);
    c.trials = 2;
    auto res = run_experiment(c);
    CHECK(res.rows.size() == 60);
    CHECK(res.trials.size() == 2);
    const std::size_t d = 32;
    std::uint64_t prev = 0;
    for (const auto& r : res.rows) {
      if (r.round == 0) prev = 0;
      CHECK(r.cumulative_chips >= prev);
      if (!r.skipped && s != SchemeKind::kIdeal) {
        CHECK(r.g_depth * r.s_n <= d + r.g_depth);
        CHECK(r.cumulative_chips - prev == r.g_depth * r.s_n);
      }
      if (r.skipped) CHECK(r.cumulative_chips == prev);
      prev = r.cumulative_chips;
    }
  }
}

TEST_CASE("all-inactive rounds are skipped and leave the model unchanged") {
  auto c = tiny(SchemeKind::kAdaptiveBd);
  c.num_devices = 1;
  c.g_th = 3.0;  // activation probability about 0.05
  Simulator sim(c, 0);
  int skipped = 0;
  for (int n = 0; n < 40; ++n) {
    auto before = sim.state().w;
    auto t = sim.run_round();
    if (t.skipped) {
      ++skipped;
      CHECK(sim.state().w == before);
    }
  }
  CHECK(skipped > 0);
}

TEST_CASE("experiments are deterministic and thread-count independent") {
  auto c = tiny(SchemeKind::kAdaptiveBd);
  c.trials = 3;
  auto a = run_rows(c);
  setenv("AIRBREATHE_THREADS", "1", 1);
  auto b = run_rows(c);
  unsetenv("AIRBREATHE_THREADS");
  CHECK(same_rows(a, b));
  c.master_seed = 18;
  CHECK_FALSE(same_rows(a, run_rows(c)));
}

TEST_CASE("same seed writes identical files") {
  auto c = tiny(SchemeKind::kFixedBd);
  c.trials = 2;
  auto p1 = tmp("a.csv"), p2 = tmp("b.csv");
  write_telemetry_csv(p1.string(), run_rows(c));
  write_telemetry_csv(p2.string(), run_rows(c));
  CHECK(slurp(p1) == slurp(p2));
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("ideal scheme reaches high accuracy on separable data") {
  auto c = tiny(SchemeKind::kIdeal);
  c.rounds = 100;
  c.data.mixture.separation = 6.0;
  auto res = run_experiment(c);
  CHECK(res.trials[0].final_accuracy >= 0.95);
}

TEST_CASE("telemetry csv round trip") {
  auto c = tiny(SchemeKind::kAdaptiveBd);
  auto rows = run_rows(c);
  auto p = tmp("rt.csv");
  write_telemetry_csv(p.string(), rows);
  auto back = read_telemetry_csv(p.string());
  CHECK(same_rows(rows, back));
  CHECK(slurp(p).rfind(telemetry_header(), 0) == 0);
  {
    std::ofstream bad(p);
    bad << "round,loss\n0,1\n";
  }
  CHECK_THROWS_AS(read_telemetry_csv(p.string()), ConfigError);
  std::filesystem::remove(p);
}

TEST_CASE("unwritable output is reported") {
  auto file = tmp("plain_file");
  std::ofstream(file) << "x";
  CHECK_THROWS_AS(ensure_writable((file / "out.csv").string()), IoError);
  std::filesystem::remove(file);
}

TEST_CASE("plot data alignment") {
  RoundTelemetry r0, r1, r2;
  r0.round = 0;
  r0.cumulative_chips = 10;
  r0.accuracy = 0.5;
  r1.round = 1;
  r1.skipped = true;
  r1.cumulative_chips = 10;
  r1.accuracy = 0.5;
  r2.round = 2;
  r2.cumulative_chips = 30;
  r2.accuracy = 0.9;
  RoundTelemetry s0;
  s0.cumulative_chips = 20;
  s0.accuracy = 0.7;
  std::vector<std::pair<std::string, std::vector<RoundTelemetry>>> tables = {
      {"a", {r0, r1, r2}}, {"b", {s0}}};
  auto series = align_series(tables);
  REQUIRE(series.size() == 2);
  REQUIRE(series[0].points.size() == 3);
  CHECK(series[0].points[0].chips == 10);
  CHECK(series[0].points[1].chips == 20);
  CHECK(series[0].points[1].accuracy == 0.5);
  CHECK(series[0].points[2].accuracy == 0.9);
  CHECK(series[1].points[2].accuracy == 0.7);

  auto dir = tmp("plots");
  std::filesystem::create_directories(dir);
  auto files = emit_plot_data({tables[0]}, dir.string());
  REQUIRE(files.size() == 1);
  CHECK(slurp(files[0]).rfind("cumulative_chips,accuracy,loss", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config json round trip and overrides") {
  auto c = tiny(SchemeKind::kPruneOnly);
  c.scheme.gamma = 0.25;
  c.u_form = PropagationForm::kAppendix;
  Json j = config_to_json(c);
  auto back = config_from_json(j);
  CHECK(config_to_json(back) == j);

  apply_override(j, "task.eta=0.5");
  apply_override(j, "scheme=adaptive_bd");
  apply_override(j, "sir_db=-10");
  auto o = config_from_json(j);
  CHECK(o.task.eta == 0.5);
  CHECK(o.scheme.kind == SchemeKind::kAdaptiveBd);
  CHECK(o.sir_db == -10.0);
  CHECK_THROWS_AS(apply_override(j, "no_equals_sign"), ConfigError);

  Json bad = config_to_json(c);
  bad["unexpected"] = 1;
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  Json wrong = config_to_json(c);
  wrong["rounds"] = "many";
  CHECK_THROWS_AS(config_from_json(wrong), ConfigError);
}

TEST_CASE("config files load with comments and overrides") {
  auto p = tmp("cfg.json");
  {
    std::ofstream f(p);
    f << "{\n  // preset\n  \"scheme\": \"fixed_bd\",\n  \"rounds\": 7,\n"
         "  \"task\": {\"lambda\": 0.2}\n}\n";
  }
  auto c = load_config(p.string(), {"devices=4"});
  CHECK(c.scheme.kind == SchemeKind::kFixedBd);
  CHECK(c.rounds == 7);
  CHECK(c.task.lambda == 0.2);
  CHECK(c.num_devices == 4);
  std::filesystem::remove(p);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.json", {}), ConfigError);
}

TEST_CASE("summary json carries the config and aggregates") {
  auto c = tiny(SchemeKind::kNoSb);
  auto res = run_experiment(c);
  Json s = Json::parse(summary_json(c, res));
  CHECK(s.contains("config"));
  CHECK(s.contains("trials"));
  CHECK(s.contains("aggregate"));
}
