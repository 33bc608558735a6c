/*
 * Copyright 2026 The apfetch Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <random>

namespace apfetch {

using Rng = std::mt19937_64;

// Purpose-specific random streams derived from one experiment seed. Strategies
// compared under the same seed therefore see identical traces and loads.
enum class Stream : std::uint64_t {
  kTrace = 1,
  kLoad = 2,
  kPlacement = 3,
  kRandomPolicy = 4,
  kExploration = 5,
  kHistory = 6,
  kHeuristicPolicy = 7,
};

std::uint64_t splitmix64(std::uint64_t& state);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t run, Stream stream);

Rng make_rng(std::uint64_t seed, std::uint64_t run, Stream stream);

// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace apfetch
