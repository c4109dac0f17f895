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

#include "airbreathe/config.hpp"

#include <fstream>
#include <set>

#include "airbreathe/error.hpp"

namespace airbreathe {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key " + where + "." + key);
  }
}

template <typename T>
void read(const Json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("bad value for ") + key);
  }
}

template <typename T>
void read_unsigned(const Json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  const Json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string(key) + " must be a nonnegative integer");
  }
  dst = v.get<T>();
}

}  // namespace

namespace {

ExperimentConfig parse_config(const Json& j) {
  check_keys(j, {"name", "scheme", "gamma", "task", "data", "partition", "devices", "rounds",
                 "sir_db", "g_th", "p_i", "seed", "trials", "depth_override", "u_form",
                 "power_budget", "eval_every", "output"},
             "config");
  ExperimentConfig c;
  read(j, "name", c.name);
  if (j.contains("scheme")) c.scheme.kind = scheme_from_string(j.at("scheme").get<std::string>());
  read(j, "gamma", c.scheme.gamma);
  read_unsigned(j, "devices", c.num_devices);
  read_unsigned(j, "rounds", c.rounds);
  read(j, "sir_db", c.sir_db);
  read(j, "g_th", c.g_th);
  read(j, "p_i", c.p_i);
  read_unsigned(j, "seed", c.master_seed);
  read_unsigned(j, "trials", c.trials);
  read_unsigned(j, "depth_override", c.depth_override);
  read(j, "power_budget", c.power_budget);
  read_unsigned(j, "eval_every", c.eval_every);
  if (j.contains("u_form")) {
    std::string f = j.at("u_form").get<std::string>();
    if (f == "main") c.u_form = PropagationForm::kMainText;
    else if (f == "appendix") c.u_form = PropagationForm::kAppendix;
    else throw ConfigError("u_form must be main or appendix");
  }

  if (j.contains("task")) {
    const Json& t = j.at("task");
    check_keys(t, {"kind", "lambda", "batch_size", "eta", "hidden", "init_scale"}, "task");
    if (t.contains("kind")) c.task.kind = task_kind_from_string(t.at("kind").get<std::string>());
    read(t, "lambda", c.task.lambda);
    read_unsigned(t, "batch_size", c.task.batch_size);
    read(t, "eta", c.task.eta);
    read_unsigned(t, "hidden", c.task.hidden);
    read(t, "init_scale", c.task.init_scale);
  }
  if (j.contains("data")) {
    const Json& d = j.at("data");
    check_keys(d, {"source", "samples", "features", "separation", "scale", "noise_std",
                   "stiff_count", "stiff_std", "validation_samples", "cloud_center",
                   "cloud_spread", "train_path", "train_labels_path", "validation_path",
                   "validation_labels_path", "limit"},
               "data");
    if (d.contains("source")) c.data.source = data_source_from_string(d.at("source").get<std::string>());
    read_unsigned(d, "samples", c.data.mixture.samples);
    read_unsigned(d, "features", c.data.mixture.features);
    read(d, "separation", c.data.mixture.separation);
    read(d, "scale", c.data.mixture.scale);
    read(d, "noise_std", c.data.mixture.noise_std);
    read_unsigned(d, "stiff_count", c.data.mixture.stiff_count);
    read(d, "stiff_std", c.data.mixture.stiff_std);
    read_unsigned(d, "validation_samples", c.data.validation_samples);
    read(d, "cloud_center", c.data.cloud_center);
    read(d, "cloud_spread", c.data.cloud_spread);
    read(d, "train_path", c.data.train_path);
    read(d, "train_labels_path", c.data.train_labels_path);
    read(d, "validation_path", c.data.validation_path);
    read(d, "validation_labels_path", c.data.validation_labels_path);
    read_unsigned(d, "limit", c.data.limit);
  }
  if (j.contains("partition")) {
    const Json& p = j.at("partition");
    check_keys(p, {"scheme", "per_device"}, "partition");
    if (p.contains("scheme")) {
      std::string s = p.at("scheme").get<std::string>();
      if (s == "iid") c.partition.scheme = PartitionScheme::kIid;
      else if (s == "shards") c.partition.scheme = PartitionScheme::kShards;
      else throw ConfigError("partition.scheme must be iid or shards");
    }
    read_unsigned(p, "per_device", c.partition.per_device);
  }
  if (j.contains("output")) {
    const Json& o = j.at("output");
    check_keys(o, {"csv", "summary"}, "output");
    read(o, "csv", c.output_csv);
    read(o, "summary", c.output_summary);
  }
  c.validate();
  return c;
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  j["scheme"] = std::string(to_string(c.scheme.kind));
  j["gamma"] = c.scheme.gamma;
  j["task"] = {{"kind", std::string(to_string(c.task.kind))},
               {"lambda", c.task.lambda},
               {"batch_size", c.task.batch_size},
               {"eta", c.task.eta},
               {"hidden", c.task.hidden},
               {"init_scale", c.task.init_scale}};
  j["data"] = {{"source", std::string(to_string(c.data.source))},
               {"samples", c.data.mixture.samples},
               {"features", c.data.mixture.features},
               {"separation", c.data.mixture.separation},
               {"scale", c.data.mixture.scale},
               {"noise_std", c.data.mixture.noise_std},
               {"stiff_count", c.data.mixture.stiff_count},
               {"stiff_std", c.data.mixture.stiff_std},
               {"validation_samples", c.data.validation_samples},
               {"cloud_center", c.data.cloud_center},
               {"cloud_spread", c.data.cloud_spread},
               {"train_path", c.data.train_path},
               {"train_labels_path", c.data.train_labels_path},
               {"validation_path", c.data.validation_path},
               {"validation_labels_path", c.data.validation_labels_path},
               {"limit", c.data.limit}};
  j["partition"] = {
      {"scheme", c.partition.scheme == PartitionScheme::kIid ? "iid" : "shards"},
      {"per_device", c.partition.per_device}};
  j["devices"] = c.num_devices;
  j["rounds"] = c.rounds;
  j["sir_db"] = c.sir_db;
  j["g_th"] = c.g_th;
  j["p_i"] = c.p_i;
  j["seed"] = c.master_seed;
  j["trials"] = c.trials;
  j["depth_override"] = c.depth_override;
  j["u_form"] = c.u_form == PropagationForm::kMainText ? "main" : "appendix";
  j["power_budget"] = c.power_budget;
  j["eval_every"] = c.eval_every;
  j["output"] = {{"csv", c.output_csv}, {"summary", c.output_summary}};
  return j;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
}

void apply_override(Json& j, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must be key=value: " + assignment);
  std::string key = assignment.substr(0, eq);
  std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    auto dot = key.find('.', start);
    std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("empty key segment in override " + assignment);
    if (!node->is_object()) throw ConfigError("override path crosses a non-object: " + key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  Json j = path.empty() ? Json::object() : load_json_file(path);
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

}  // namespace airbreathe
