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
#include <cstdint>
#include <vector>

#include "apfetch/cost_model.hpp"
#include "apfetch/mdp.hpp"

namespace apfetch {

struct SlotRecord {
  std::int64_t slot = 0;
  int watched = 0;
  double load = 0.0;
  PrefetchAction action;
  bool hit = false;
  // A nonempty action was replaced by the empty one because the load was saturated.
  bool suppressed = false;
  bool delay_clamped = false;
  double startup_delay = 0.0;
  StageCost cost;
};

struct PrefetchEvent {
  std::size_t slot = 0;
  int episode = 0;
  // Slots in which the item was watched while this prefetch kept it cached.
  int consumptions = 0;
};

/// Everything one simulated run produced, in slot order.
struct RunLedger {
  std::vector<SlotRecord> slots;
  std::vector<PrefetchEvent> prefetches;
  double lambda1 = 0.0;

  std::size_t horizon() const { return slots.size(); }
};

enum class UsefulCounting {
  kRepeat,           // every watched slot counts (a prefetch can be useful more than once)
  kOncePerPrefetch,  // a prefetch counts at most once
};

struct Ratio {
  double value = 0.0;
  std::size_t numerator = 0;
  std::size_t denominator = 0;
  bool empty_denominator = false;
};

std::size_t useful_prefetches(const RunLedger& ledger, UsefulCounting counting = UsefulCounting::kRepeat);
std::size_t total_prefetches(const RunLedger& ledger);

/// p_u / p_t; 0 with empty_denominator set when nothing was prefetched.
Ratio precision_ratio(const RunLedger& ledger, UsefulCounting counting = UsefulCounting::kRepeat);
/// p_u / r_t with one request per slot.
Ratio hit_ratio(const RunLedger& ledger, UsefulCounting counting = UsefulCounting::kRepeat);

struct CostSummary {
  double total = 0.0;
  double monetary = 0.0;
  double qoe = 0.0;
  std::vector<StageCost> per_slot;
};

CostSummary cost_summary(const RunLedger& ledger);

/// Pooled metrics over many runs; sums are order independent.
struct Aggregate {
  std::size_t runs = 0;
  std::size_t useful = 0;
  std::size_t useful_strict = 0;
  std::size_t prefetched = 0;
  std::size_t requests = 0;
  std::size_t clamped_delays = 0;
  std::size_t suppressed_actions = 0;
  double total_sum = 0.0;
  double total_sq_sum = 0.0;
  double monetary_sum = 0.0;
  double qoe_sum = 0.0;

  void add(const RunLedger& ledger);
  void merge(const Aggregate& other);
  double precision() const;
  double precision_strict() const;
  double hit_ratio() const;
  double mean_total() const;
  double std_total() const;
  double mean_monetary() const;
  double mean_qoe() const;
};

}  // namespace apfetch
