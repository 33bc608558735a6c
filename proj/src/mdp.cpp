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

#include "apfetch/mdp.hpp"

#include <algorithm>
#include <string>

#include "apfetch/errors.hpp"
#include "apfetch/trace_model.hpp"

namespace apfetch {

void MdpConfig::validate() const {
  if (episodes < 1 || ttl < 1 || prefetch_cap < 0 || horizon < 1) {
    throw DomainError("MDP config requires episodes, ttl, horizon >= 1 and prefetch_cap >= 0");
  }
}

namespace {

auto find_entry(const CacheContents& cache, int episode) {
  return std::lower_bound(cache.begin(), cache.end(), episode,
                          [](const CacheEntry& e, int ep) { return e.episode < ep; });
}

}  // namespace

bool SystemState::cached(int episode) const { return lifetime(episode) > 0; }

int SystemState::lifetime(int episode) const {
  auto it = find_entry(cache, episode);
  return (it != cache.end() && it->episode == episode) ? it->lifetime : 0;
}

void SystemState::validate(const MdpConfig& config) const {
  if (watched < 1 || watched > config.episodes) throw DomainError("watched episode out of range");
  for (std::size_t i = 0; i < cache.size(); ++i) {
    const auto& e = cache[i];
    if (e.episode < 1 || e.episode > config.episodes) throw DomainError("cached episode out of range");
    if (e.lifetime < 1 || e.lifetime > config.ttl) throw DomainError("cached lifetime out of range");
    if (i > 0 && cache[i - 1].episode >= e.episode) throw DomainError("cache not sorted/distinct");
  }
}

PrefetchAction::PrefetchAction(std::vector<int> eps) : episodes(std::move(eps)) {
  std::sort(episodes.begin(), episodes.end());
  episodes.erase(std::unique(episodes.begin(), episodes.end()), episodes.end());
}

bool PrefetchAction::contains(int episode) const {
  return std::binary_search(episodes.begin(), episodes.end(), episode);
}

void PrefetchAction::validate(const MdpConfig& config) const {
  if (static_cast<int>(episodes.size()) > config.prefetch_cap) {
    throw DomainError("prefetch set of size " + std::to_string(episodes.size()) +
                      " exceeds cap " + std::to_string(config.prefetch_cap));
  }
  for (int e : episodes) {
    if (e < 1 || e > config.episodes) throw DomainError("prefetched episode out of range");
  }
}

CacheContents step_cache(const CacheContents& cache, const PrefetchAction& action,
                         const MdpConfig& config) {
  action.validate(config);
  CacheContents next;
  next.reserve(cache.size() + action.size());
  auto it = action.episodes.begin();
  const auto end = action.episodes.end();
  for (const auto& entry : cache) {
    while (it != end && *it < entry.episode) next.push_back({*it++, config.ttl});
    if (it != end && *it == entry.episode) {
      next.push_back({*it++, config.ttl});
    } else if (entry.lifetime > 1) {
      next.push_back({entry.episode, entry.lifetime - 1});
    }
  }
  while (it != end) next.push_back({*it++, config.ttl});
  return next;
}

double transition_probability(const SystemState& state, const PrefetchAction& action,
                              const SystemState& next, const EpisodeTransitionModel& model,
                              const MdpConfig& config) {
  if (next.cache != step_cache(state.cache, action, config)) return 0.0;
  const auto p = model.next_distribution(state.watched);
  if (next.watched < 1 || next.watched > static_cast<int>(p.size())) return 0.0;
  return p[next.watched - 1];
}

std::vector<PrefetchAction> enumerate_actions_full(const MdpConfig& config) {
  std::vector<PrefetchAction> out;
  out.emplace_back();
  std::vector<int> pick;
  const int m = config.episodes;
  for (int k = 1; k <= std::min(config.prefetch_cap, m); ++k) {
    pick.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) pick[i] = i + 1;
    while (true) {
      out.emplace_back(pick);
      int i = k - 1;
      while (i >= 0 && pick[i] == m - k + i + 1) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return out;
}

namespace {

constexpr std::array<std::array<int, 3>, kReducedActionCount> kOffsets{{
    {0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {1, 2, 0}, {1, 3, 0}, {2, 3, 0}, {1, 2, 3}}};
constexpr std::array<std::size_t, kReducedActionCount> kOffsetCount{0, 1, 1, 1, 2, 2, 2, 3};

}  // namespace

std::span<const int> reduced_offsets(int index) {
  if (index < 0 || index >= kReducedActionCount) throw DomainError("reduced action index out of range");
  return std::span<const int>(kOffsets[index].data(), kOffsetCount[index]);
}

std::optional<PrefetchAction> reduced_action(int index, int watched, const MdpConfig& config) {
  const auto offsets = reduced_offsets(index);
  if (static_cast<int>(offsets.size()) > config.prefetch_cap) return std::nullopt;
  std::vector<int> eps;
  for (int off : offsets) {
    if (watched + off > config.episodes) return std::nullopt;
    eps.push_back(watched + off);
  }
  return PrefetchAction(std::move(eps));
}

std::vector<int> admissible_reduced_indices(int watched, const MdpConfig& config, bool saturated) {
  std::vector<int> out{0};
  if (saturated) return out;
  for (int a = 1; a < kReducedActionCount; ++a) {
    if (reduced_action(a, watched, config)) out.push_back(a);
  }
  return out;
}

std::vector<PrefetchAction> enumerate_actions_reduced(const SystemState& state,
                                                      const MdpConfig& config) {
  std::vector<PrefetchAction> out;
  for (int a : admissible_reduced_indices(state.watched, config)) {
    out.push_back(*reduced_action(a, state.watched, config));
  }
  return out;
}

boost::multiprecision::cpp_int state_space_size(int episodes, int ttl) {
  if (episodes < 1 || ttl < 0) throw DomainError("state space needs episodes >= 1 and ttl >= 0");
  boost::multiprecision::cpp_int n = episodes;
  const boost::multiprecision::cpp_int base = ttl + 1;
  for (int i = 0; i < episodes; ++i) n *= base;
  return n;
}

boost::multiprecision::cpp_int state_space_size(const MdpConfig& config) {
  return state_space_size(config.episodes, config.ttl);
}

}  // namespace apfetch
