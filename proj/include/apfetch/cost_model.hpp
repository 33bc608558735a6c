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

namespace apfetch {

struct SystemState;
struct PrefetchAction;

/// Constants of the monetary and QoE cost terms. Defaults are the reference
/// simulation settings.
struct CostParams {
  double beta = 0.16;            // transmission tuning scalar
  double kappa = 6e-5;           // USD per stored item per slot
  double load_threshold = 1.0;   // l_th
  double d0 = 0.05;              // startup delay from the AP, seconds
  double d1_scale = 2.0;         // server startup delay d1 = d1_scale * l / l_th seconds
  double lambda1 = 0.9;          // weight of the QoE cost
  double lambda2 = 0.02;         // weight of the competition cost, < 1
  double bandwidth = 1.0;        // residential downlink; cancels out of the competition cost
  // A demand download at or above l_th is still served; its barrier is charged
  // at saturation_cap * l_th.
  double saturation_cap = 0.999;

  void validate() const;
  bool saturated(double load) const { return load >= load_threshold; }
};

/// -ln(1 - l / l_th). Throws SaturationError for l >= l_th, DomainError for l < 0.
double barrier(double load, double load_threshold);

/// beta * barrier(l) * x. Free for x = 0 at any load.
double transmission_cost(std::size_t items, double load, const CostParams& p);

double storage_cost(std::size_t items, const CostParams& p);

/// Server startup delay, clamped below by d0 (the linear rule drops under d0
/// at light load) and evaluated at no more than l_th.
double server_delay(double load, const CostParams& p);
/// True when the linear rule alone would give a delay below d0.
bool server_delay_clamped(double load, const CostParams& p);

/// (d1 - d0) * x for x in {0, 1}.
double latency_cost(std::size_t items, double load, const CostParams& p);

/// Bandwidth-sharing penalty: 0 when x = 0 or y = 0, else ln(x + y).
double competition_cost(std::size_t prefetch_count, int miss_flag);

struct StageCost {
  double total = 0.0;
  double monetary = 0.0;
  double qoe = 0.0;
  int miss = 0;  // 1 when the watched episode was not in the cache
};

/// Per-slot cost g = C^m + lambda1 C^q of taking `action` in `state` at `load`.
/// Throws SaturationError when the action prefetches at a saturated load.
StageCost stage_cost(const SystemState& state, const PrefetchAction& action, double load,
                     const CostParams& p);

/// Beta such that the median of beta * barrier(l) over `loads` equals
/// `target_median_cost` (0.048 USD in the reference setting).
double calibrate_beta(std::span<const double> loads, double load_threshold,
                      double target_median_cost = 0.048);

}  // namespace apfetch
