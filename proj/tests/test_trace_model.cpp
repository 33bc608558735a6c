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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "apfetch/errors.hpp"
#include "apfetch/trace_model.hpp"

using namespace apfetch;

namespace {

// Independent completion of the truncated transition law: list every outcome
// with its raw weight, then divide by the total.
std::vector<double> oracle_distribution(const EpisodeTransitionModel& m, int current) {
  std::vector<double> w(m.num_episodes + 1, 0.0);
  w[current] = m.p_same;
  for (int j = 1; j <= 3; ++j) {
    if (current + j <= m.num_episodes) w[current + j] = m.p_forward3 * m.forward3_split[j - 1];
  }
  std::vector<int> far;
  for (int e = 1; e <= m.num_episodes; ++e) {
    if (e != current && !(e > current && e <= current + 3)) far.push_back(e);
  }
  for (int e : far) w[e] += m.p_far / static_cast<double>(far.size());
  double total = 0.0;
  for (double v : w) total += v;
  std::vector<double> p(m.num_episodes, 0.0);
  if (total == 0.0) {
    p[current - 1] = 1.0;
    return p;
  }
  for (int e = 1; e <= m.num_episodes; ++e) p[e - 1] = w[e] / total;
  return p;
}

std::vector<double> empirical(const EpisodeTransitionModel& model, int current, int samples,
                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> f(model.num_episodes, 0.0);
  for (int i = 0; i < samples; ++i) f[sample_next_episode(model, current, rng) - 1] += 1.0;
  for (double& v : f) v /= samples;
  return f;
}

EpisodeTransitionModel model_with(int m) {
  EpisodeTransitionModel model;
  model.num_episodes = m;
  return model;
}

}  // namespace

TEST_CASE("default transition parameters are valid") {
  EpisodeTransitionModel model;
  CHECK_NOTHROW(model.validate());
  CHECK(model.p_same + model.p_forward3 + model.p_far == doctest::Approx(1.0).epsilon(1e-12));
  const double split = model.forward3_split[0] + model.forward3_split[1] + model.forward3_split[2];
  CHECK(split == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("invalid transition parameters are rejected") {
  EpisodeTransitionModel model;
  model.p_same = 0.5;
  CHECK_THROWS_AS((model.validate()), DomainError);
  model = {};
  model.forward3_split = {0.5, 0.6, -0.1};
  CHECK_THROWS_AS((model.validate()), DomainError);
  model = {};
  model.num_episodes = 0;
  CHECK_THROWS_AS((model.validate()), DomainError);
  CHECK_THROWS_AS((model_with(5).next_distribution(6)), DomainError);
}

TEST_CASE("analytic distribution sums to one and matches the oracle") {
  for (int m : {1, 2, 3, 4, 5, 7, 30, 33}) {
    const auto model = model_with(m);
    for (int c = 1; c <= m; ++c) {
      CAPTURE(m);
      CAPTURE(c);
      const auto p = model.next_distribution(c);
      const auto q = oracle_distribution(model, c);
      CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
      for (int e = 0; e < m; ++e) CHECK(p[e] == doctest::Approx(q[e]).epsilon(1e-12));
    }
  }
}

TEST_CASE("sums to one for arbitrary parameter mixes") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    EpisodeTransitionModel model;
    model.num_episodes = 1 + static_cast<int>(rng() % 12);
    const double a = u(rng), b = u(rng), c = u(rng);
    model.p_same = a / (a + b + c);
    model.p_forward3 = b / (a + b + c);
    model.p_far = 1.0 - model.p_same - model.p_forward3;
    const double s0 = u(rng), s1 = u(rng), s2 = u(rng);
    model.forward3_split = {s0 / (s0 + s1 + s2), s1 / (s0 + s1 + s2), 0.0};
    model.forward3_split[2] = 1.0 - model.forward3_split[0] - model.forward3_split[1];
    for (int cur = 1; cur <= model.num_episodes; ++cur) {
      const auto p = model.next_distribution(cur);
      CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("stay frequency away from the boundary is 0.35") {
  const auto f = empirical(model_with(33), 15, 1'000'000, 11);
  CHECK(std::abs(f[14] - 0.35) < 0.01);
}

TEST_CASE("boundary episode follows the renormalized truncated law") {
  const auto model = model_with(5);
  const auto f = empirical(model, 5, 1'000'000, 12);
  const auto q = oracle_distribution(model, 5);
  double l1 = 0.0;
  for (int e = 0; e < 5; ++e) l1 += std::abs(f[e] - q[e]);
  CHECK(l1 < 0.01);
}

TEST_CASE("empirical frequencies match the analytic law everywhere") {
  const auto model = model_with(8);
  for (int c : {1, 4, 6, 8}) {
    const auto f = empirical(model, c, 1'000'000, 100 + c);
    const auto p = model.next_distribution(c);
    double worst = 0.0;
    for (int e = 0; e < 8; ++e) worst = std::max(worst, std::abs(f[e] - p[e]));
    CHECK(worst < 0.01);
  }
}

TEST_CASE("single-episode model always returns episode 1") {
  const auto model = model_with(1);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) CHECK(sample_next_episode(model, 1, rng) == 1);
  CHECK(model.next_distribution(1) == std::vector<double>{1.0});
}

TEST_CASE("trace generation") {
  const auto model = model_with(30);
  SUBCASE("length one is just the start") {
    Rng rng(1);
    const auto t = generate_watch_trace(model, 1, 7, rng);
    REQUIRE(t.size() == 1);
    CHECK(t.episode_at(0) == 7);
    CHECK(t.slots[0].slot == 0);
  }
  SUBCASE("equal seeds give identical traces") {
    Rng a(99), b(99);
    CHECK(generate_watch_trace(model, 200, 3, a) == generate_watch_trace(model, 200, 3, b));
  }
  SUBCASE("p_same = 1 never moves") {
    EpisodeTransitionModel sticky = model;
    sticky.p_same = 1.0;
    sticky.p_forward3 = 0.0;
    sticky.p_far = 0.0;
    Rng rng(5);
    const auto t = generate_watch_trace(sticky, 50, 12, rng);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.episode_at(i) == 12);
  }
  SUBCASE("generated traces satisfy the trace invariants") {
    Rng rng(8);
    const auto t = generate_watch_trace(model, 500, 1, rng);
    CHECK_NOTHROW(t.validate(30));
  }
  SUBCASE("bad arguments") {
    Rng rng(1);
    CHECK_THROWS_AS((generate_watch_trace(model, 0, 1, rng)), DomainError);
    CHECK_THROWS_AS((generate_watch_trace(model, 5, 31, rng)), DomainError);
  }
}

TEST_CASE("server load generator") {
  const auto base = default_daily_profile(1.0);
  SUBCASE("default profile peaks at 0.95 and has two peaks") {
    CHECK(*std::max_element(base.begin(), base.end()) == doctest::Approx(0.95));
    int peaks = 0;
    for (int h = 0; h < 24; ++h) {
      if (base[h] > base[(h + 23) % 24] && base[h] > base[(h + 1) % 24]) ++peaks;
    }
    CHECK(peaks == 2);
  }
  SUBCASE("zero noise repeats the base shape") {
    Rng rng(1);
    const auto s = generate_server_load(24 * 5, base, 0.0, 0.0, rng);
    for (std::size_t t = 0; t < s.size(); ++t) CHECK(s.values[t] == base[t % 24]);
  }
  SUBCASE("fixed seed reproduces the series") {
    Rng a(4), b(4);
    CHECK(generate_server_load(336, base, 0.02, 0.1, a) == generate_server_load(336, base, 0.02, 0.1, b));
  }
  SUBCASE("weekly amplitude 0.5 on a constant shape spans a factor of three") {
    std::array<double, 24> flat;
    flat.fill(0.4);
    Rng rng(1);
    const auto s = generate_server_load(168, flat, 0.0, 0.5, rng);
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    CHECK(*hi / *lo == doctest::Approx(3.0).epsilon(1e-9));
  }
  SUBCASE("noise never drives the load negative") {
    std::array<double, 24> small;
    small.fill(0.01);
    Rng rng(2);
    const auto s = generate_server_load(500, small, 0.5, 0.0, rng);
    for (double v : s.values) CHECK(v >= 0.0);
  }
}

TEST_CASE("watch trace CSV parsing") {
  SUBCASE("empty data section") {
    std::istringstream in("user_id,slot,episode\n");
    try {
      parse_watch_trace_csv(in, 30);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("length >= 1") != std::string::npos);
    }
  }
  SUBCASE("episode zero is out of range") {
    std::istringstream in("user_id,slot,episode\nu,0,1\nu,1,0\n");
    CHECK_THROWS_AS((parse_watch_trace_csv(in, 30)), ValidationError);
  }
  SUBCASE("episode above m is out of range") {
    std::istringstream in("user_id,slot,episode\nu,0,31\n");
    CHECK_THROWS_AS((parse_watch_trace_csv(in, 30)), ValidationError);
  }
  SUBCASE("non-increasing slots") {
    std::istringstream in("user_id,slot,episode\nu,1,1\nu,1,2\n");
    CHECK_THROWS_AS((parse_watch_trace_csv(in, 30)), ValidationError);
  }
  SUBCASE("malformed row reports its line") {
    std::istringstream in("user_id,slot,episode\nu,0,1\nu,x,2\n");
    try {
      parse_watch_trace_csv(in, 30);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("wrong column count") {
    std::istringstream in("user_id,slot,episode\nu,0\n");
    CHECK_THROWS_AS((parse_watch_trace_csv(in, 30)), ParseError);
  }
  SUBCASE("wrong header") {
    std::istringstream in("user,slot,episode\nu,0,1\n");
    CHECK_THROWS_AS((parse_watch_trace_csv(in, 30)), ParseError);
  }
  SUBCASE("multiple users are grouped") {
    std::istringstream in("user_id,slot,episode\na,0,1\nb,0,4\na,1,2\nb,3,5\n");
    const auto traces = parse_watch_traces_csv(in, 30);
    REQUIRE(traces.size() == 2);
    CHECK(traces[0].user_id == "a");
    CHECK(traces[0].episodes() == std::vector<int>{1, 2});
    CHECK(traces[1].episodes() == std::vector<int>{4, 5});
    CHECK(traces[1].slots[1].slot == 3);
  }
}

TEST_CASE("watch trace CSV round trip") {
  const auto model = model_with(30);
  Rng rng(21);
  std::vector<WatchTrace> traces{generate_watch_trace(model, 40, 1, rng, "alice"),
                                 generate_watch_trace(model, 25, 9, rng, "bob")};
  std::ostringstream out;
  write_watch_trace_csv(out, traces);
  std::istringstream in(out.str());
  CHECK(parse_watch_traces_csv(in, 30) == traces);
}

TEST_CASE("server load CSV") {
  SUBCASE("round trip is exact") {
    Rng rng(5);
    const auto s = generate_server_load(100, default_daily_profile(1.0), 0.03, 0.0, rng);
    std::ostringstream out;
    write_server_load_csv(out, s);
    std::istringstream in(out.str());
    CHECK(parse_server_load_csv(in) == s);
  }
  SUBCASE("hours must be consecutive from zero") {
    std::istringstream in("hour,load\n0,0.1\n2,0.2\n");
    CHECK_THROWS_AS((parse_server_load_csv(in)), ValidationError);
  }
  SUBCASE("negative load") {
    std::istringstream in("hour,load\n0,-0.1\n");
    CHECK_THROWS_AS((parse_server_load_csv(in)), ValidationError);
  }
  SUBCASE("empty series") {
    std::istringstream in("hour,load\n");
    CHECK_THROWS_AS((parse_server_load_csv(in)), ValidationError);
  }
}
