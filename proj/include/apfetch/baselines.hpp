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

#include <span>
#include <vector>

#include "apfetch/rng.hpp"
#include "apfetch/simulate.hpp"

namespace apfetch {

/// Prefetches a uniformly random k-subset of all episodes every slot.
class RandomFixedPolicy final : public Policy {
 public:
  RandomFixedPolicy(int k, const MdpConfig& config, Rng rng);
  PrefetchAction decide(const SystemState& state, std::size_t slot, double load) override;
  int k() const { return k_; }

 private:
  int k_;
  MdpConfig config_;
  Rng rng_;
};

/// Prefetches a uniformly random k-subset of the next three episodes (fewer
/// near the end of the series).
class HeuristicPolicy final : public Policy {
 public:
  HeuristicPolicy(int k, const MdpConfig& config, Rng rng);
  PrefetchAction decide(const SystemState& state, std::size_t slot, double load) override;
  int k() const { return k_; }

 private:
  int k_;
  MdpConfig config_;
  Rng rng_;
};

/// Every fixed choice k of a baseline family simulated on the same inputs.
struct FamilyResult {
  std::vector<int> choices;  // k of each ledger
  std::vector<RunLedger> ledgers;
  double mean_total = 0.0;  // mean realized total cost over all ledgers
};

/// k = 0..K_th, each repeated `repeats` times with fresh randomness.
FamilyResult evaluate_fixed_family(const WatchTrace& trace, std::span<const double> loads,
                                   const MdpConfig& config, const CostParams& params, Rng& rng,
                                   int repeats = 1);

/// k = 0..min(3, K_th).
FamilyResult evaluate_heuristic_family(const WatchTrace& trace, std::span<const double> loads,
                                       const MdpConfig& config, const CostParams& params, Rng& rng,
                                       int repeats = 1);

}  // namespace apfetch
