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
#include <vector>

#include <json.hpp>

#include "airbreathe/experiment.hpp"

namespace airbreathe {

using Json = nlohmann::json;

// Unknown keys and ill-typed values raise ConfigError.
ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& cfg);

Json load_json_file(const std::string& path);

// "a.b.c=value"; value is parsed as JSON when possible, else kept as a string.
void apply_override(Json& j, const std::string& assignment);

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

}  // namespace airbreathe
