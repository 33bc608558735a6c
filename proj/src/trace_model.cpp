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

#include "apfetch/trace_model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>

#include "apfetch/errors.hpp"

namespace apfetch {

namespace {

constexpr double kSumTolerance = 1e-12;

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

}  // namespace

void EpisodeTransitionModel::validate() const {
  if (num_episodes < 1) throw DomainError("num_episodes must be positive");
  if (!is_probability(p_same) || !is_probability(p_forward3) || !is_probability(p_far)) {
    throw DomainError("transition probabilities must lie in [0, 1]");
  }
  if (std::fabs(p_same + p_forward3 + p_far - 1.0) > kSumTolerance) {
    throw DomainError("p_same + p_forward3 + p_far must equal 1");
  }
  double split = 0.0;
  for (double s : forward3_split) {
    if (!is_probability(s)) throw DomainError("forward3_split entries must lie in [0, 1]");
    split += s;
  }
  if (std::fabs(split - 1.0) > kSumTolerance) throw DomainError("forward3_split must sum to 1");
}

std::vector<double> EpisodeTransitionModel::next_distribution(int current) const {
  const int m = num_episodes;
  if (current < 1 || current > m) {
    throw DomainError("current episode " + std::to_string(current) + " outside [1, " +
                      std::to_string(m) + "]");
  }
  std::vector<double> p(static_cast<std::size_t>(m), 0.0);
  p[current - 1] += p_same;
  for (int j = 1; j <= 3; ++j) {
    const int e = current + j;
    if (e <= m) p[e - 1] += p_forward3 * forward3_split[j - 1];
  }
  // Far jumps: everything that is neither the current episode nor one of the
  // next three.
  int far_count = 0;
  for (int e = 1; e <= m; ++e) {
    if (e < current || e > current + 3) ++far_count;
  }
  if (far_count > 0) {
    const double each = p_far / far_count;
    for (int e = 1; e <= m; ++e) {
      if (e < current || e > current + 3) p[e - 1] += each;
    }
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (total <= 0.0) {
    std::fill(p.begin(), p.end(), 0.0);
    p[current - 1] = 1.0;
    return p;
  }
  for (double& v : p) v /= total;
  return p;
}

int sample_next_episode(const EpisodeTransitionModel& model, int current, Rng& rng) {
  const std::vector<double> p = model.next_distribution(current);
  const double u = uniform01(rng);
  double cdf = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cdf += p[i];
    if (u < cdf) return static_cast<int>(i) + 1;
  }
  // u landed in the rounding gap above the last cumulative value
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] > 0.0) return static_cast<int>(i) + 1;
  }
  return current;
}

std::vector<int> WatchTrace::episodes() const {
  std::vector<int> out;
  out.reserve(slots.size());
  for (const auto& s : slots) out.push_back(s.episode);
  return out;
}

void WatchTrace::validate(std::optional<int> num_episodes) const {
  if (slots.empty()) throw ValidationError("watch trace violates length >= 1");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& s = slots[i];
    if (s.episode < 1 || (num_episodes && s.episode > *num_episodes)) {
      throw ValidationError("episode " + std::to_string(s.episode) + " at slot " +
                            std::to_string(s.slot) + " out of range");
    }
    if (i > 0 && s.slot <= slots[i - 1].slot) {
      throw ValidationError("slot indices must be strictly increasing (slot " +
                            std::to_string(s.slot) + ")");
    }
  }
}

WatchTrace generate_watch_trace(const EpisodeTransitionModel& model, std::size_t length,
                                int start_episode, Rng& rng, std::string user_id) {
  model.validate();
  if (length == 0) throw DomainError("trace length must be at least 1");
  if (start_episode < 1 || start_episode > model.num_episodes) {
    throw DomainError("start episode out of range");
  }
  WatchTrace trace;
  trace.user_id = std::move(user_id);
  trace.slots.reserve(length);
  int current = start_episode;
  trace.slots.push_back({0, current});
  for (std::size_t t = 1; t < length; ++t) {
    current = sample_next_episode(model, current, rng);
    trace.slots.push_back({static_cast<std::int64_t>(t), current});
  }
  return trace;
}

void ServerLoadSeries::validate() const {
  if (values.empty()) throw ValidationError("server load series violates length >= 1");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      throw ValidationError("server load at hour " + std::to_string(start_hour + static_cast<std::int64_t>(i)) +
                            " is negative or non-finite");
    }
  }
}

std::array<double, 24> default_daily_profile(double load_threshold) {
  // Overnight trough, a lunchtime shoulder and the evening prime-time peak.
  static constexpr std::array<double, 24> shape{
      0.45, 0.28, 0.20, 0.14, 0.11, 0.10, 0.12, 0.17, 0.22, 0.24, 0.29, 0.45,
      0.58, 0.52, 0.38, 0.27, 0.25, 0.25, 0.27, 0.45, 0.70, 0.95, 0.88, 0.68};
  std::array<double, 24> out{};
  for (std::size_t h = 0; h < 24; ++h) out[h] = shape[h] * load_threshold;
  return out;
}

ServerLoadSeries generate_server_load(std::size_t hours, std::span<const double> base_shape,
                                      double noise_std, double weekly_amplitude, Rng& rng) {
  if (hours < 24) throw DomainError("load series needs at least 24 hours");
  if (base_shape.size() != 24) throw DomainError("base_shape must have 24 entries");
  if (!(noise_std >= 0.0)) throw DomainError("noise_std must be nonnegative");
  for (double b : base_shape) {
    if (!(b >= 0.0)) throw DomainError("base_shape entries must be nonnegative");
  }
  std::normal_distribution<double> noise(0.0, noise_std > 0.0 ? noise_std : 1.0);
  ServerLoadSeries series;
  series.values.resize(hours);
  for (std::size_t t = 0; t < hours; ++t) {
    const double weekly =
        1.0 + weekly_amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 168.0);
    double v = base_shape[t % 24] * weekly;
    if (noise_std > 0.0) v += noise(rng);
    series.values[t] = std::max(0.0, v);
  }
  return series;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view field, std::string_view name, std::size_t line) {
  field = trim(field);
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError("malformed " + std::string(name) + " '" + std::string(field) + "'", line);
  }
  return value;
}

// Reads lines, checks the header, and hands each non-blank data row to `row`.
template <typename RowFn>
void read_csv(std::istream& in, std::string_view header, std::size_t columns, RowFn&& row) {
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (!seen_header) {
      if (view.size() >= 3 && static_cast<unsigned char>(view[0]) == 0xEF) view.remove_prefix(3);
      if (view != header) {
        throw ParseError("expected header '" + std::string(header) + "'", line_no);
      }
      seen_header = true;
      continue;
    }
    if (view.empty()) continue;
    auto fields = split_row(view);
    if (fields.size() != columns) {
      throw ParseError("expected " + std::to_string(columns) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    row(fields, line_no);
  }
  if (!seen_header) throw ParseError("missing header", line_no + 1);
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<WatchTrace> parse_watch_traces_csv(std::istream& in, std::optional<int> num_episodes) {
  std::vector<WatchTrace> traces;
  std::map<std::string, std::size_t, std::less<>> index;
  read_csv(in, "user_id,slot,episode", 3, [&](const auto& f, std::size_t line) {
    const std::string_view user = trim(f[0]);
    if (user.empty()) throw ParseError("empty user_id", line);
    const auto slot = parse_number<std::int64_t>(f[1], "slot", line);
    const auto episode = parse_number<int>(f[2], "episode", line);
    if (slot < 0) throw ValidationError("negative slot index at line " + std::to_string(line));
    auto it = index.find(user);
    if (it == index.end()) {
      it = index.emplace(std::string(user), traces.size()).first;
      traces.push_back(WatchTrace{std::string(user), {}});
    }
    traces[it->second].slots.push_back({slot, episode});
  });
  if (traces.empty()) throw ValidationError("watch trace violates length >= 1");
  for (const auto& t : traces) t.validate(num_episodes);
  return traces;
}

WatchTrace parse_watch_trace_csv(std::istream& in, std::optional<int> num_episodes) {
  auto traces = parse_watch_traces_csv(in, num_episodes);
  if (traces.size() != 1) {
    throw ValidationError("expected a single user, found " + std::to_string(traces.size()));
  }
  return std::move(traces.front());
}

ServerLoadSeries parse_server_load_csv(std::istream& in) {
  ServerLoadSeries series;
  read_csv(in, "hour,load", 2, [&](const auto& f, std::size_t line) {
    const auto hour = parse_number<std::int64_t>(f[0], "hour", line);
    const auto load = parse_number<double>(f[1], "load", line);
    if (hour != static_cast<std::int64_t>(series.values.size())) {
      throw ValidationError("hours must be 0-based and consecutive (line " + std::to_string(line) +
                            ")");
    }
    series.values.push_back(load);
  });
  series.validate();
  return series;
}

WatchTrace load_watch_trace_csv(const std::filesystem::path& path, std::optional<int> num_episodes) {
  auto in = open_or_throw(path);
  return parse_watch_trace_csv(in, num_episodes);
}

std::vector<WatchTrace> load_watch_traces_csv(const std::filesystem::path& path,
                                              std::optional<int> num_episodes) {
  auto in = open_or_throw(path);
  return parse_watch_traces_csv(in, num_episodes);
}

ServerLoadSeries load_server_load_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_server_load_csv(in);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

void write_watch_trace_csv(std::ostream& out, std::span<const WatchTrace> traces) {
  out << "user_id,slot,episode\n";
  for (const auto& t : traces) {
    for (const auto& s : t.slots) out << t.user_id << ',' << s.slot << ',' << s.episode << '\n';
  }
}

void write_server_load_csv(std::ostream& out, const ServerLoadSeries& series) {
  out << "hour,load\n";
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    out << i << ',' << format_double(series.values[i]) << '\n';
  }
}

}  // namespace apfetch
