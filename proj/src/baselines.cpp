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

#include "apfetch/baselines.hpp"

#include <algorithm>
#include <string>

#include "apfetch/errors.hpp"

namespace apfetch {

namespace {

// Partial Fisher-Yates: the first k entries become a uniform k-subset.
std::vector<int> sample_subset(std::vector<int> pool, int k, Rng& rng) {
  const std::size_t take = std::min(pool.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(take);
  return pool;
}

}  // namespace

RandomFixedPolicy::RandomFixedPolicy(int k, const MdpConfig& config, Rng rng)
    : k_(k), config_(config), rng_(rng) {
  if (k < 0 || k > config.prefetch_cap) {
    throw DomainError("random prefetch count " + std::to_string(k) + " outside [0, K_th]");
  }
  if (k > config.episodes) throw DomainError("random prefetch count exceeds the episode count");
}

PrefetchAction RandomFixedPolicy::decide(const SystemState&, std::size_t, double) {
  if (k_ == 0) return {};
  std::vector<int> pool(static_cast<std::size_t>(config_.episodes));
  for (int e = 1; e <= config_.episodes; ++e) pool[e - 1] = e;
  return PrefetchAction(sample_subset(std::move(pool), k_, rng_));
}

HeuristicPolicy::HeuristicPolicy(int k, const MdpConfig& config, Rng rng)
    : k_(k), config_(config), rng_(rng) {
  if (k < 0 || k > 3 || k > config.prefetch_cap) {
    throw DomainError("heuristic prefetch count " + std::to_string(k) + " outside [0, min(3, K_th)]");
  }
}

PrefetchAction HeuristicPolicy::decide(const SystemState& state, std::size_t, double) {
  if (k_ == 0) return {};
  std::vector<int> pool;
  for (int off = 1; off <= 3; ++off) {
    if (state.watched + off <= config_.episodes) pool.push_back(state.watched + off);
  }
  return PrefetchAction(sample_subset(std::move(pool), k_, rng_));
}

namespace {

template <typename MakePolicy>
FamilyResult run_family(const WatchTrace& trace, std::span<const double> loads,
                        const MdpConfig& config, const CostParams& params, Rng& rng, int max_k,
                        int repeats, MakePolicy&& make) {
  check_alignment(trace, loads);
  if (repeats < 1) throw DomainError("family repeats must be at least 1");
  FamilyResult out;
  double sum = 0.0;
  for (int k = 0; k <= max_k; ++k) {
    for (int r = 0; r < repeats; ++r) {
      auto policy = make(k, Rng(rng()));
      out.choices.push_back(k);
      out.ledgers.push_back(simulate(trace, loads, config, params, policy));
      sum += cost_summary(out.ledgers.back()).total;
    }
  }
  out.mean_total = sum / static_cast<double>(out.ledgers.size());
  return out;
}

}  // namespace

FamilyResult evaluate_fixed_family(const WatchTrace& trace, std::span<const double> loads,
                                   const MdpConfig& config, const CostParams& params, Rng& rng,
                                   int repeats) {
  const int max_k = std::min(config.prefetch_cap, config.episodes);
  return run_family(trace, loads, config, params, rng, max_k, repeats,
                    [&](int k, Rng r) { return RandomFixedPolicy(k, config, r); });
}

FamilyResult evaluate_heuristic_family(const WatchTrace& trace, std::span<const double> loads,
                                       const MdpConfig& config, const CostParams& params, Rng& rng,
                                       int repeats) {
  const int max_k = std::min(3, config.prefetch_cap);
  return run_family(trace, loads, config, params, rng, max_k, repeats,
                    [&](int k, Rng r) { return HeuristicPolicy(k, config, r); });
}

}  // namespace apfetch
