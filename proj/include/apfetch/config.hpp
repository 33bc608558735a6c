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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apfetch/cost_model.hpp"
#include "apfetch/mdp.hpp"
#include "apfetch/qlearning.hpp"
#include "apfetch/trace_model.hpp"

namespace apfetch {

enum class Placement {
  kLoadWeighted,  // busier hours are proportionally more likely to host a session
  kUniform,
};

struct LoadSettings {
  std::size_t hours = 336;  // two weeks
  double noise_std = 0.015;
  double weekly_amplitude = 0.0;
  std::optional<std::filesystem::path> csv;
};

/// Everything one experiment needs. Loaded from a flat `key = value` file;
/// command-line flags go through the same setter.
struct ExperimentConfig {
  MdpConfig mdp;
  CostParams cost;
  LearnParams learn;
  EpisodeTransitionModel transitions;
  LoadSettings load;
  Placement placement = Placement::kLoadWeighted;
  std::optional<std::filesystem::path> trace_csv;
  std::optional<std::filesystem::path> theta_path;  // pre-trained weights for the online strategy
  int start_episode = 1;
  int history_traces = 20;
  int family_repeats = 1;
  int runs = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> strategies{"random", "heuristic", "offline", "online"};
  std::vector<double> sweep_lambda1{0.0, 0.3, 0.6, 0.9};
  int case_k = 2;
  int threads = 0;  // 0: hardware concurrency
  std::filesystem::path out_dir = "out";

  /// Applies one key; throws ConfigError for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  /// Checks cross-field invariants and that referenced files exist.
  void validate() const;
};

inline constexpr std::string_view kStrategyNames[] = {"random", "heuristic", "offline", "online"};

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Keys accepted by ExperimentConfig::set, in documentation order.
std::vector<std::string_view> config_keys();

}  // namespace apfetch
