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

#include "apfetch/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "apfetch/errors.hpp"

namespace apfetch {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T to_number(std::string_view key, std::string_view value) {
  value = trim(value);
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw ConfigError("bad value for '" + std::string(key) + "': '" + std::string(value) + "'");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  value = trim(value);
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad boolean for '" + std::string(key) + "': '" + std::string(value) + "'");
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const auto item = trim(value.substr(start, comma == std::string_view::npos ? value.npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, std::string_view)>;

template <typename T, typename Field>
Setter num(Field field) {
  return [field](ExperimentConfig& c, std::string_view k, std::string_view v) {
    field(c) = to_number<T>(k, v);
  };
}

const std::vector<std::pair<std::string_view, Setter>>& setters() {
  static const std::vector<std::pair<std::string_view, Setter>> table{
      {"episodes", num<int>([](ExperimentConfig& c) -> int& { return c.mdp.episodes; })},
      {"ttl", num<int>([](ExperimentConfig& c) -> int& { return c.mdp.ttl; })},
      {"prefetch_cap", num<int>([](ExperimentConfig& c) -> int& { return c.mdp.prefetch_cap; })},
      {"horizon", num<int>([](ExperimentConfig& c) -> int& { return c.mdp.horizon; })},
      {"beta", num<double>([](ExperimentConfig& c) -> double& { return c.cost.beta; })},
      {"kappa", num<double>([](ExperimentConfig& c) -> double& { return c.cost.kappa; })},
      {"load_threshold", num<double>([](ExperimentConfig& c) -> double& { return c.cost.load_threshold; })},
      {"d0", num<double>([](ExperimentConfig& c) -> double& { return c.cost.d0; })},
      {"d1_scale", num<double>([](ExperimentConfig& c) -> double& { return c.cost.d1_scale; })},
      {"lambda1", num<double>([](ExperimentConfig& c) -> double& { return c.cost.lambda1; })},
      {"lambda2", num<double>([](ExperimentConfig& c) -> double& { return c.cost.lambda2; })},
      {"bandwidth", num<double>([](ExperimentConfig& c) -> double& { return c.cost.bandwidth; })},
      {"saturation_cap", num<double>([](ExperimentConfig& c) -> double& { return c.cost.saturation_cap; })},
      {"alpha", num<double>([](ExperimentConfig& c) -> double& { return c.learn.alpha; })},
      {"gamma", num<double>([](ExperimentConfig& c) -> double& { return c.learn.gamma; })},
      {"epsilon0", num<double>([](ExperimentConfig& c) -> double& { return c.learn.epsilon0; })},
      {"epsilon_decay", num<double>([](ExperimentConfig& c) -> double& { return c.learn.epsilon_decay; })},
      {"chi", num<double>([](ExperimentConfig& c) -> double& { return c.learn.chi; })},
      {"max_sweeps", num<int>([](ExperimentConfig& c) -> int& { return c.learn.max_sweeps; })},
      {"divergence_bound", num<double>([](ExperimentConfig& c) -> double& { return c.learn.divergence_bound; })},
      {"normalize_step",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.learn.normalize_step = to_bool(k, v); }},
      {"p_same", num<double>([](ExperimentConfig& c) -> double& { return c.transitions.p_same; })},
      {"p_forward3", num<double>([](ExperimentConfig& c) -> double& { return c.transitions.p_forward3; })},
      {"p_far", num<double>([](ExperimentConfig& c) -> double& { return c.transitions.p_far; })},
      {"forward3_split",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         const auto items = split_list(v);
         if (items.size() != 3) throw ConfigError("forward3_split needs three comma-separated values");
         for (std::size_t i = 0; i < 3; ++i) c.transitions.forward3_split[i] = to_number<double>(k, items[i]);
       }},
      {"load_hours", num<std::size_t>([](ExperimentConfig& c) -> std::size_t& { return c.load.hours; })},
      {"load_noise_std", num<double>([](ExperimentConfig& c) -> double& { return c.load.noise_std; })},
      {"load_weekly_amplitude",
       num<double>([](ExperimentConfig& c) -> double& { return c.load.weekly_amplitude; })},
      {"load_csv",
       [](ExperimentConfig& c, std::string_view, std::string_view v) {
         if (v.empty()) c.load.csv.reset(); else c.load.csv = std::filesystem::path(v);
       }},
      {"placement",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         if (v == "load_weighted") c.placement = Placement::kLoadWeighted;
         else if (v == "uniform") c.placement = Placement::kUniform;
         else throw ConfigError("bad value for '" + std::string(k) + "': expected load_weighted or uniform");
       }},
      {"trace_csv",
       [](ExperimentConfig& c, std::string_view, std::string_view v) {
         if (v.empty()) c.trace_csv.reset(); else c.trace_csv = std::filesystem::path(v);
       }},
      {"theta",
       [](ExperimentConfig& c, std::string_view, std::string_view v) {
         if (v.empty()) c.theta_path.reset(); else c.theta_path = std::filesystem::path(v);
       }},
      {"start_episode", num<int>([](ExperimentConfig& c) -> int& { return c.start_episode; })},
      {"history_traces", num<int>([](ExperimentConfig& c) -> int& { return c.history_traces; })},
      {"family_repeats", num<int>([](ExperimentConfig& c) -> int& { return c.family_repeats; })},
      {"runs", num<int>([](ExperimentConfig& c) -> int& { return c.runs; })},
      {"seed", num<std::uint64_t>([](ExperimentConfig& c) -> std::uint64_t& { return c.seed; })},
      {"strategies",
       [](ExperimentConfig& c, std::string_view, std::string_view v) {
         c.strategies.clear();
         for (auto s : split_list(v)) c.strategies.emplace_back(s);
       }},
      {"sweep_lambda1",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.sweep_lambda1.clear();
         for (auto s : split_list(v)) c.sweep_lambda1.push_back(to_number<double>(k, s));
       }},
      {"case_k", num<int>([](ExperimentConfig& c) -> int& { return c.case_k; })},
      {"threads", num<int>([](ExperimentConfig& c) -> int& { return c.threads; })},
      {"out", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.out_dir = std::filesystem::path(v); }},
  };
  return table;
}

}  // namespace

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  for (const auto& [name, setter] : setters()) {
    if (name == key) {
      setter(*this, key, value);
      if (key == "episodes") transitions.num_episodes = mdp.episodes;
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::vector<std::string_view> config_keys() {
  std::vector<std::string_view> keys;
  for (const auto& [name, setter] : setters()) keys.push_back(name);
  return keys;
}

void ExperimentConfig::validate() const {
  try {
    mdp.validate();
    cost.validate();
    learn.validate();
    transitions.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (transitions.num_episodes != mdp.episodes) {
    throw ConfigError("transition model and MDP disagree on the episode count");
  }
  if (runs < 1) throw ConfigError("runs must be at least 1");
  if (strategies.empty()) throw ConfigError("strategy list is empty");
  for (const auto& s : strategies) {
    if (std::find(std::begin(kStrategyNames), std::end(kStrategyNames), s) == std::end(kStrategyNames)) {
      throw ConfigError("unknown strategy '" + s + "'");
    }
  }
  if (start_episode < 0 || start_episode > mdp.episodes) {
    throw ConfigError("start_episode must be 0 (random) or in [1, episodes]");
  }
  if (history_traces < 1) throw ConfigError("history_traces must be at least 1");
  if (family_repeats < 1) throw ConfigError("family_repeats must be at least 1");
  if (case_k < 0 || case_k > mdp.prefetch_cap || case_k > 3) {
    throw ConfigError("case_k must lie in [0, min(3, prefetch_cap)]");
  }
  if (threads < 0) throw ConfigError("threads must be nonnegative");
  if (load.hours < 24) throw ConfigError("load_hours must be at least 24");
  if (!(load.noise_std >= 0.0)) throw ConfigError("load_noise_std must be nonnegative");
  for (double l : sweep_lambda1) {
    if (!(l >= 0.0)) throw ConfigError("sweep_lambda1 values must be nonnegative");
  }
  for (const auto* p : {&load.csv, &trace_csv, &theta_path}) {
    if (*p && !std::filesystem::exists(**p)) throw ConfigError("file not found: " + (*p)->string());
  }
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      base.set(view.substr(0, eq), view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in, std::move(base));
}

}  // namespace apfetch
