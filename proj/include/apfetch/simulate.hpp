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

#include <cstddef>
#include <span>
#include <string_view>

#include "apfetch/cost_model.hpp"
#include "apfetch/mdp.hpp"
#include "apfetch/metrics.hpp"
#include "apfetch/trace_model.hpp"

namespace apfetch {

/// What a policy learns after acting in one slot. `next` is null after the
/// final slot of a run.
struct Transition {
  const SystemState& state;
  const PrefetchAction& action;
  const StageCost& cost;
  const SystemState* next;
  double load;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PrefetchAction decide(const SystemState& state, std::size_t slot, double load) = 0;
  virtual void observe(const Transition&) {}
};

/// Runs `policy` over the trace with one load per slot, starting from an empty
/// cache. Nonempty actions at saturated loads are replaced by the empty action
/// and flagged in the ledger.
RunLedger simulate(const WatchTrace& trace, std::span<const double> loads, const MdpConfig& config,
                   const CostParams& params, Policy& policy);

void check_alignment(const WatchTrace& trace, std::span<const double> loads);

}  // namespace apfetch
