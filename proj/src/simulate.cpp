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

#include "apfetch/simulate.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "apfetch/errors.hpp"

namespace apfetch {

void check_alignment(const WatchTrace& trace, std::span<const double> loads) {
  if (trace.slots.empty()) throw DomainError("trace is empty");
  if (loads.size() != trace.size()) {
    throw DomainError("trace has " + std::to_string(trace.size()) + " slots but " +
                      std::to_string(loads.size()) + " loads were given");
  }
}

RunLedger simulate(const WatchTrace& trace, std::span<const double> loads, const MdpConfig& config,
                   const CostParams& params, Policy& policy) {
  check_alignment(trace, loads);
  RunLedger ledger;
  ledger.lambda1 = params.lambda1;
  ledger.slots.reserve(trace.size());

  // Episode -> prefetch event that currently keeps it cached.
  std::map<int, std::size_t> live;
  SystemState state{trace.episode_at(0), {}};
  state.validate(config);

  for (std::size_t t = 0; t < trace.size(); ++t) {
    const double load = loads[t];
    SlotRecord rec;
    rec.slot = trace.slots[t].slot;
    rec.watched = state.watched;
    rec.load = load;
    rec.action = policy.decide(state, t, load);
    rec.action.validate(config);
    if (!rec.action.empty() && params.saturated(load)) {
      rec.action = PrefetchAction{};
      rec.suppressed = true;
    }
    rec.cost = stage_cost(state, rec.action, load, params);
    rec.hit = rec.cost.miss == 0;
    if (rec.hit) {
      rec.startup_delay = params.d0;
      if (auto it = live.find(state.watched); it != live.end()) {
        ++ledger.prefetches[it->second].consumptions;
      }
    } else {
      rec.startup_delay = server_delay(load, params);
      rec.delay_clamped = server_delay_clamped(load, params);
    }

    for (int e : rec.action.episodes) {
      live[e] = ledger.prefetches.size();
      ledger.prefetches.push_back({t, e, 0});
    }

    SystemState next;
    next.cache = step_cache(state.cache, rec.action, config);
    for (auto it = live.begin(); it != live.end();) {
      const bool kept = std::binary_search(
          next.cache.begin(), next.cache.end(), CacheEntry{it->first, 0},
          [](const CacheEntry& a, const CacheEntry& b) { return a.episode < b.episode; });
      it = kept ? std::next(it) : live.erase(it);
    }

    const bool last = t + 1 == trace.size();
    if (!last) {
      next.watched = trace.episode_at(t + 1);
      next.validate(config);
    }
    policy.observe(Transition{state, rec.action, rec.cost, last ? nullptr : &next, load});
    ledger.slots.push_back(std::move(rec));
    if (!last) state = std::move(next);
  }
  return ledger;
}

}  // namespace apfetch
