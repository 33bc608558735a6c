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

#include "apfetch/offline.hpp"

#include <limits>

#include "apfetch/errors.hpp"

namespace apfetch {

std::size_t OfflineSolution::tabulated_states() const {
  std::size_t n = 0;
  for (const auto& layer : policy) n += layer.size();
  return n;
}

OfflineSolution offline_solve(const WatchTrace& trace, std::span<const double> loads,
                              const MdpConfig& config, const CostParams& params) {
  config.validate();
  check_alignment(trace, loads);
  trace.validate(config.episodes);
  const std::size_t horizon = trace.size();

  std::vector<std::vector<int>> actions(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    actions[t] = admissible_reduced_indices(trace.episode_at(t), config, params.saturated(loads[t]));
  }
  auto concrete = [&](int index, std::size_t t) {
    return *reduced_action(index, trace.episode_at(t), config);
  };

  // Forward sweep: caches reachable at each slot.
  OfflineSolution sol;
  sol.value.resize(horizon + 1);
  sol.policy.resize(horizon);
  sol.value[0].emplace(CacheContents{}, 0.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    for (const auto& [cache, unused] : sol.value[t]) {
      for (int a : actions[t]) {
        sol.value[t + 1].emplace(step_cache(cache, concrete(a, t), config), 0.0);
      }
    }
  }

  // Backward induction; value[horizon] stays zero.
  for (std::size_t t = horizon; t-- > 0;) {
    auto& layer = sol.value[t];
    const auto& next_layer = sol.value[t + 1];
    for (auto& [cache, value] : layer) {
      const SystemState state{trace.episode_at(t), cache};
      double best = std::numeric_limits<double>::infinity();
      int best_action = 0;
      for (int a : actions[t]) {
        const PrefetchAction action = concrete(a, t);
        double g = 0.0;
        try {
          g = stage_cost(state, action, loads[t], params).total;
        } catch (const SaturationError&) {
          continue;
        }
        const double v = g + next_layer.at(step_cache(cache, action, config));
        if (v < best) {
          best = v;
          best_action = a;
        }
      }
      value = best;
      sol.policy[t].emplace(cache, best_action);
    }
  }

  CacheContents cache;
  for (std::size_t t = 0; t < horizon; ++t) {
    const int a = sol.policy[t].at(cache);
    sol.plan.push_back(a);
    cache = step_cache(cache, concrete(a, t), config);
  }
  sol.optimal_cost = sol.value[0].at(CacheContents{});
  return sol;
}

PrefetchAction OfflinePolicy::decide(const SystemState& state, std::size_t slot, double) {
  if (slot >= solution_.policy.size()) throw DomainError("slot beyond the solved horizon");
  const auto& layer = solution_.policy[slot];
  const auto it = layer.find(state.cache);
  if (it == layer.end()) throw DomainError("state not reachable under the offline solution");
  return *reduced_action(it->second, state.watched, config_);
}

}  // namespace apfetch
