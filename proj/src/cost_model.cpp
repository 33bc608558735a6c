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

#include "apfetch/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "apfetch/errors.hpp"
#include "apfetch/mdp.hpp"

namespace apfetch {

void CostParams::validate() const {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (!(kappa >= 0.0)) throw DomainError("kappa must be nonnegative");
  if (!(load_threshold > 0.0)) throw DomainError("load threshold must be positive");
  if (!(d0 >= 0.0)) throw DomainError("d0 must be nonnegative");
  if (!(d1_scale >= 0.0)) throw DomainError("d1 scale must be nonnegative");
  if (!(lambda1 >= 0.0)) throw DomainError("lambda1 must be nonnegative");
  if (!(lambda2 >= 0.0 && lambda2 < 1.0)) throw DomainError("lambda2 must lie in [0, 1)");
  if (!(bandwidth > 0.0)) throw DomainError("bandwidth must be positive");
  if (!(saturation_cap > 0.0 && saturation_cap < 1.0)) {
    throw DomainError("saturation cap must lie in (0, 1)");
  }
}

double barrier(double load, double load_threshold) {
  if (!(load >= 0.0)) throw DomainError("load must be nonnegative");
  if (load >= load_threshold) {
    throw SaturationError("load " + std::to_string(load) + " at or above threshold " +
                          std::to_string(load_threshold));
  }
  return -std::log1p(-load / load_threshold);
}

double transmission_cost(std::size_t items, double load, const CostParams& p) {
  if (items == 0) return 0.0;
  return p.beta * barrier(load, p.load_threshold) * static_cast<double>(items);
}

double storage_cost(std::size_t items, const CostParams& p) {
  return p.kappa * static_cast<double>(items);
}

bool server_delay_clamped(double load, const CostParams& p) {
  return p.d1_scale * std::min(load, p.load_threshold) / p.load_threshold < p.d0;
}

double server_delay(double load, const CostParams& p) {
  const double l = std::min(std::max(load, 0.0), p.load_threshold);
  return std::max(p.d1_scale * l / p.load_threshold, p.d0);
}

double latency_cost(std::size_t items, double load, const CostParams& p) {
  if (items > 1) throw DomainError("latency cost takes at most one missed item per slot");
  if (items == 0) return 0.0;
  return server_delay(load, p) - p.d0;
}

double competition_cost(std::size_t prefetch_count, int miss_flag) {
  if (miss_flag != 0 && miss_flag != 1) throw DomainError("miss flag must be 0 or 1");
  if (prefetch_count == 0 || miss_flag == 0) return 0.0;
  return std::log(static_cast<double>(prefetch_count) + 1.0);
}

StageCost stage_cost(const SystemState& state, const PrefetchAction& action, double load,
                     const CostParams& p) {
  StageCost c;
  c.miss = state.cached(state.watched) ? 0 : 1;
  const std::size_t x = action.size();

  double demand = 0.0;
  if (c.miss == 1) {
    const double l = p.saturated(load) ? p.saturation_cap * p.load_threshold : load;
    demand = transmission_cost(1, l, p);
  }
  std::size_t stored = state.cache.size();
  for (int e : action.episodes) {
    if (!state.cached(e)) ++stored;
  }
  c.monetary = transmission_cost(x, load, p) + demand + storage_cost(stored, p);
  c.qoe = latency_cost(static_cast<std::size_t>(c.miss), load, p) +
          p.lambda2 * competition_cost(x, c.miss);
  c.total = c.monetary + p.lambda1 * c.qoe;
  return c;
}

double calibrate_beta(std::span<const double> loads, double load_threshold,
                      double target_median_cost) {
  std::vector<double> psi;
  psi.reserve(loads.size());
  for (double l : loads) {
    if (l < load_threshold) psi.push_back(barrier(l, load_threshold));
  }
  if (psi.empty()) throw DomainError("no unsaturated loads to calibrate against");
  std::sort(psi.begin(), psi.end());
  const std::size_t n = psi.size();
  const double median = n % 2 == 1 ? psi[n / 2] : 0.5 * (psi[n / 2 - 1] + psi[n / 2]);
  if (!(median > 0.0)) throw DomainError("median barrier is zero; beta is undetermined");
  return target_median_cost / median;
}

}  // namespace apfetch
