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

#include <functional>
#include <string>
#include <vector>

namespace airbreathe::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Criterion {
  int id;
  std::string name;
  std::function<CriterionResult()> run;
};

std::vector<Criterion> all_criteria();

CriterionResult mse_decomposition();
CriterionResult processing_gain();
CriterionResult activation_probability_check();
CriterionResult random_compression_identity();
CriterionResult depth_optimizer_oracles();
CriterionResult moment_bounds();
CriterionResult desk_convergence();
CriterionResult supermartingale_drift();
CriterionResult failure_bound_validity();
CriterionResult gradient_correctness();

// Runs the selected ids (all when empty), prints one line per criterion and
// returns the number of failures.
int run_and_report(const std::vector<int>& ids, bool verbose);

}  // namespace airbreathe::acceptance
