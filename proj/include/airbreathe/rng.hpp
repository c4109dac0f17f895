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

#include <cstdint>
#include <random>
#include <string_view>

namespace airbreathe {

using Rng = std::mt19937_64;

// Independent randomness sources of a simulation. Each gets its own stream
// so that toggling one source leaves the draws of every other unchanged.
enum class Stream : std::uint64_t {
  kData = 1,
  kValidation,
  kPartition,
  kInit,
  kBatch,
  kChannel,
  kInterference,
  kMask,
  kPn,
  kMonteCarlo,
};

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based seed derivation: hashes (master, stream, a, b) into a seed.
std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t a = 0,
                          std::uint64_t b = 0);

Rng make_stream(std::uint64_t master, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0);

std::uint64_t hash_name(std::string_view name);

}  // namespace airbreathe
