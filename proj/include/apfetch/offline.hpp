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

#include <map>
#include <span>
#include <vector>

#include "apfetch/simulate.hpp"

namespace apfetch {

/// Per-slot optimal policy for a fully known trace and load sequence.
///
/// With the viewing sequence known the problem is deterministic, so the state
/// at slot t reduces to the cache contents. Only caches reachable from the
/// empty start under the reduced action set are tabulated.
struct OfflineSolution {
  // policy[t][cache] and value[t][cache]; value[T] is the zero terminal layer.
  std::vector<std::map<CacheContents, int>> policy;
  std::vector<std::map<CacheContents, double>> value;
  std::vector<int> plan;  // reduced action indices along the optimal path
  double optimal_cost = 0.0;

  std::size_t tabulated_states() const;
};

OfflineSolution offline_solve(const WatchTrace& trace, std::span<const double> loads,
                              const MdpConfig& config, const CostParams& params);

/// Replays an OfflineSolution on the trace it was solved for.
class OfflinePolicy final : public Policy {
 public:
  OfflinePolicy(const OfflineSolution& solution, const MdpConfig& config)
      : solution_(solution), config_(config) {}
  PrefetchAction decide(const SystemState& state, std::size_t slot, double load) override;

 private:
  const OfflineSolution& solution_;
  MdpConfig config_;
};

}  // namespace apfetch
