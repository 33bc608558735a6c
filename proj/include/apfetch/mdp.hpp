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

#include <array>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace apfetch {

struct EpisodeTransitionModel;

struct MdpConfig {
  int episodes = 30;     // m
  int ttl = 3;           // T_th, slots an item survives after its last prefetch
  int prefetch_cap = 3;  // K_th
  int horizon = 30;      // effective slots per run

  void validate() const;
};

struct CacheEntry {
  int episode = 0;
  int lifetime = 0;  // remaining slots, 1..ttl
  auto operator<=>(const CacheEntry&) const = default;
};

/// AP cache contents, sorted by episode, one entry per episode.
using CacheContents = std::vector<CacheEntry>;

struct SystemState {
  int watched = 1;
  CacheContents cache;

  bool cached(int episode) const;
  // Remaining lifetime, 0 when absent.
  int lifetime(int episode) const;
  void validate(const MdpConfig& config) const;

  auto operator<=>(const SystemState&) const = default;
};

/// Episodes to prefetch this slot. Deletions are never chosen: they follow
/// from lifetimes.
struct PrefetchAction {
  std::vector<int> episodes;  // sorted, distinct

  PrefetchAction() = default;
  explicit PrefetchAction(std::vector<int> eps);
  PrefetchAction(std::initializer_list<int> eps) : PrefetchAction(std::vector<int>(eps)) {}

  std::size_t size() const { return episodes.size(); }
  bool empty() const { return episodes.empty(); }
  bool contains(int episode) const;
  void validate(const MdpConfig& config) const;

  auto operator<=>(const PrefetchAction&) const = default;
};

/// Next cache: surviving items age by one slot and expire at zero; prefetched
/// items enter (or are refreshed) with lifetime ttl.
CacheContents step_cache(const CacheContents& cache, const PrefetchAction& action,
                         const MdpConfig& config);

/// P(next | state, action): the viewer's episode transition times the
/// deterministic cache update.
double transition_probability(const SystemState& state, const PrefetchAction& action,
                              const SystemState& next, const EpisodeTransitionModel& model,
                              const MdpConfig& config);

/// Every prefetch set of size 0..K_th over [1, m], empty set first.
std::vector<PrefetchAction> enumerate_actions_full(const MdpConfig& config);

// Reduced action space: offsets from the watched episode.
//   0: {}  1: {+1}  2: {+2}  3: {+3}  4: {+1,+2}  5: {+1,+3}  6: {+2,+3}  7: {+1,+2,+3}
inline constexpr int kReducedActionCount = 8;
std::span<const int> reduced_offsets(int index);

/// The concrete prefetch set of a reduced action, or nullopt when an offset
/// runs past episode m or the set exceeds K_th.
std::optional<PrefetchAction> reduced_action(int index, int watched, const MdpConfig& config);

/// Indices of admissible reduced actions, ascending. At a saturated load only
/// the empty action remains.
std::vector<int> admissible_reduced_indices(int watched, const MdpConfig& config,
                                            bool saturated = false);

std::vector<PrefetchAction> enumerate_actions_reduced(const SystemState& state,
                                                      const MdpConfig& config);

/// m * (ttl + 1)^m, exact.
boost::multiprecision::cpp_int state_space_size(int episodes, int ttl);
boost::multiprecision::cpp_int state_space_size(const MdpConfig& config);

}  // namespace apfetch
