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

#include "apfetch/metrics.hpp"

#include <cmath>

namespace apfetch {

std::size_t useful_prefetches(const RunLedger& ledger, UsefulCounting counting) {
  std::size_t n = 0;
  for (const auto& e : ledger.prefetches) {
    if (counting == UsefulCounting::kRepeat) {
      n += static_cast<std::size_t>(e.consumptions);
    } else if (e.consumptions > 0) {
      ++n;
    }
  }
  return n;
}

std::size_t total_prefetches(const RunLedger& ledger) { return ledger.prefetches.size(); }

Ratio precision_ratio(const RunLedger& ledger, UsefulCounting counting) {
  Ratio r;
  r.numerator = useful_prefetches(ledger, counting);
  r.denominator = total_prefetches(ledger);
  r.empty_denominator = r.denominator == 0;
  r.value = r.empty_denominator ? 0.0 : static_cast<double>(r.numerator) / r.denominator;
  return r;
}

Ratio hit_ratio(const RunLedger& ledger, UsefulCounting counting) {
  Ratio r;
  r.numerator = useful_prefetches(ledger, counting);
  r.denominator = ledger.horizon();
  r.empty_denominator = r.denominator == 0;
  r.value = r.empty_denominator ? 0.0 : static_cast<double>(r.numerator) / r.denominator;
  return r;
}

CostSummary cost_summary(const RunLedger& ledger) {
  CostSummary s;
  s.per_slot.reserve(ledger.slots.size());
  for (const auto& rec : ledger.slots) {
    s.total += rec.cost.total;
    s.monetary += rec.cost.monetary;
    s.qoe += rec.cost.qoe;
    s.per_slot.push_back(rec.cost);
  }
  return s;
}

void Aggregate::add(const RunLedger& ledger) {
  ++runs;
  useful += useful_prefetches(ledger, UsefulCounting::kRepeat);
  useful_strict += useful_prefetches(ledger, UsefulCounting::kOncePerPrefetch);
  prefetched += total_prefetches(ledger);
  requests += ledger.horizon();
  for (const auto& rec : ledger.slots) {
    if (rec.delay_clamped) ++clamped_delays;
    if (rec.suppressed) ++suppressed_actions;
  }
  const CostSummary s = cost_summary(ledger);
  total_sum += s.total;
  total_sq_sum += s.total * s.total;
  monetary_sum += s.monetary;
  qoe_sum += s.qoe;
}

void Aggregate::merge(const Aggregate& o) {
  runs += o.runs;
  useful += o.useful;
  useful_strict += o.useful_strict;
  prefetched += o.prefetched;
  requests += o.requests;
  clamped_delays += o.clamped_delays;
  suppressed_actions += o.suppressed_actions;
  total_sum += o.total_sum;
  total_sq_sum += o.total_sq_sum;
  monetary_sum += o.monetary_sum;
  qoe_sum += o.qoe_sum;
}

double Aggregate::precision() const {
  return prefetched == 0 ? 0.0 : static_cast<double>(useful) / prefetched;
}
double Aggregate::precision_strict() const {
  return prefetched == 0 ? 0.0 : static_cast<double>(useful_strict) / prefetched;
}
double Aggregate::hit_ratio() const {
  return requests == 0 ? 0.0 : static_cast<double>(useful) / requests;
}
double Aggregate::mean_total() const { return runs == 0 ? 0.0 : total_sum / runs; }
double Aggregate::std_total() const {
  if (runs < 2) return 0.0;
  const double mean = mean_total();
  const double var = (total_sq_sum - runs * mean * mean) / static_cast<double>(runs - 1);
  return var > 0.0 ? std::sqrt(var) : 0.0;
}
double Aggregate::mean_monetary() const { return runs == 0 ? 0.0 : monetary_sum / runs; }
double Aggregate::mean_qoe() const { return runs == 0 ? 0.0 : qoe_sum / runs; }

}  // namespace apfetch
