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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apfetch/rng.hpp"

namespace apfetch {

/// Parametric model of how a viewer moves between episodes of one series
/// from one session to the next.
///
/// Mass `p_same` stays on the current episode, `p_forward3` goes to the next
/// three episodes (split by `forward3_split`), and `p_far` is spread uniformly
/// over every other episode. Mass that would land outside [1, m] is dropped and
/// the in-range distribution renormalized.
struct EpisodeTransitionModel {
  int num_episodes = 30;
  double p_same = 0.35;
  double p_forward3 = 0.47;
  // Estimated per-jump shares of p_forward3 for +1, +2, +3 (decreasing).
  std::array<double, 3> forward3_split{0.25 / 0.47, 0.12 / 0.47, 0.10 / 0.47};
  double p_far = 0.18;

  void validate() const;

  // P(next = e | current) for e = 1..m, stored at index e-1.
  std::vector<double> next_distribution(int current) const;
};

int sample_next_episode(const EpisodeTransitionModel& model, int current, Rng& rng);

struct TraceSlot {
  std::int64_t slot = 0;
  int episode = 1;
  bool operator==(const TraceSlot&) const = default;
};

struct WatchTrace {
  std::string user_id;
  std::vector<TraceSlot> slots;

  std::size_t size() const { return slots.size(); }
  int episode_at(std::size_t i) const { return slots[i].episode; }
  std::vector<int> episodes() const;
  // Throws ValidationError on empty traces, non-increasing slots, or episodes
  // outside [1, num_episodes] (upper bound checked only when given).
  void validate(std::optional<int> num_episodes = std::nullopt) const;

  bool operator==(const WatchTrace&) const = default;
};

WatchTrace generate_watch_trace(const EpisodeTransitionModel& model, std::size_t length,
                                int start_episode, Rng& rng, std::string user_id = "synthetic");

/// Hourly server load, in the same unit as the load threshold.
struct ServerLoadSeries {
  std::vector<double> values;
  std::int64_t start_hour = 0;

  std::size_t size() const { return values.size(); }
  void validate() const;
  bool operator==(const ServerLoadSeries&) const = default;
};

/// Two-peak (noon and evening) daily profile whose maximum is 0.95 * load_threshold.
std::array<double, 24> default_daily_profile(double load_threshold);

/// l_t = base[t mod 24] * (1 + weekly_amplitude * sin(2 pi t / 168)) + N(0, noise_std),
/// clamped at zero.
ServerLoadSeries generate_server_load(std::size_t hours, std::span<const double> base_shape,
                                      double noise_std, double weekly_amplitude, Rng& rng);

// CSV ingestion. Formats:
//   watch trace:  user_id,slot,episode   (slot 0-based, episode 1-based)
//   server load:  hour,load              (hour 0-based and consecutive)
WatchTrace parse_watch_trace_csv(std::istream& in, std::optional<int> num_episodes = std::nullopt);
std::vector<WatchTrace> parse_watch_traces_csv(std::istream& in,
                                               std::optional<int> num_episodes = std::nullopt);
ServerLoadSeries parse_server_load_csv(std::istream& in);

WatchTrace load_watch_trace_csv(const std::filesystem::path& path,
                                std::optional<int> num_episodes = std::nullopt);
std::vector<WatchTrace> load_watch_traces_csv(const std::filesystem::path& path,
                                              std::optional<int> num_episodes = std::nullopt);
ServerLoadSeries load_server_load_csv(const std::filesystem::path& path);

void write_watch_trace_csv(std::ostream& out, std::span<const WatchTrace> traces);
void write_server_load_csv(std::ostream& out, const ServerLoadSeries& series);

std::string format_double(double v);

}  // namespace apfetch
