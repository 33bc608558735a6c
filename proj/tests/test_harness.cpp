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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "apfetch/cost_model.hpp"
#include "apfetch/errors.hpp"
#include "apfetch/harness.hpp"

using namespace apfetch;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.runs = 3;
  c.history_traces = 3;
  c.learn.max_sweeps = 20;
  c.mdp.horizon = 12;
  c.threads = 1;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("apfetch_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("keys and comments") {
    std::istringstream in(
        "# comment\n"
        "episodes = 12   # trailing\n"
        "lambda1=0.5\n"
        "strategies = offline, online\n"
        "\n"
        "seed = 99\n");
    const auto c = parse_config(in);
    CHECK(c.mdp.episodes == 12);
    CHECK(c.transitions.num_episodes == 12);
    CHECK(c.cost.lambda1 == 0.5);
    CHECK(c.strategies == std::vector<std::string>{"offline", "online"});
    CHECK(c.seed == 99);
  }
  SUBCASE("unknown key fails fast") {
    std::istringstream in("episodes = 12\nepisode_count = 3\n");
    CHECK_THROWS_AS((parse_config(in)), ConfigError);
  }
  SUBCASE("malformed values") {
    ExperimentConfig c;
    CHECK_THROWS_AS((c.set("runs", "many")), ConfigError);
    CHECK_THROWS_AS((c.set("beta", "0.1x")), ConfigError);
    CHECK_THROWS_AS((c.set("placement", "sideways")), ConfigError);
    CHECK_THROWS_AS((c.set("normalize_step", "maybe")), ConfigError);
    std::istringstream in("no equals sign here\n");
    CHECK_THROWS_AS((parse_config(in)), ConfigError);
  }
  SUBCASE("validation") {
    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    c.runs = 0;
    CHECK_THROWS_AS((c.validate()), ConfigError);
    c = {};
    c.strategies.clear();
    CHECK_THROWS_AS((c.validate()), ConfigError);
    c = {};
    c.strategies = {"oracle"};
    CHECK_THROWS_AS((c.validate()), ConfigError);
    c = {};
    c.trace_csv = "/nonexistent/trace.csv";
    CHECK_THROWS_AS((c.validate()), ConfigError);
    c = {};
    c.cost.lambda2 = 1.5;
    CHECK_THROWS_AS((c.validate()), ConfigError);
  }
  SUBCASE("every documented key is accepted") {
    for (auto key : config_keys()) CHECK(!key.empty());
    CHECK(config_keys().size() >= 40);
  }
}

TEST_CASE("session placement") {
  Rng rng(1);
  ServerLoadSeries s;
  s.values = {0.0, 0.5, 0.2, 0.9, 0.0, 0.4};
  for (int trial = 0; trial < 100; ++trial) {
    const auto h = place_sessions(s, 4, Placement::kLoadWeighted, rng);
    REQUIRE(h.size() == 4);
    CHECK(std::is_sorted(h.begin(), h.end()));
    CHECK(std::adjacent_find(h.begin(), h.end()) == h.end());
    for (auto x : h) CHECK((x == 1 || x == 2 || x == 3 || x == 5));  // zero-load hours only as a last resort
  }
  CHECK(place_sessions(s, 6, Placement::kLoadWeighted, rng).size() == 6);
  CHECK_THROWS_AS((place_sessions(s, 7, Placement::kUniform, rng)), DomainError);
  // busier hours are picked more often
  std::vector<int> count(6, 0);
  for (int trial = 0; trial < 20000; ++trial) count[place_sessions(s, 1, Placement::kLoadWeighted, rng)[0]]++;
  CHECK(count[3] > count[1]);
  CHECK(count[1] > count[2]);
  CHECK(std::abs(count[3] / 20000.0 - 0.9 / 2.0) < 0.02);
}

TEST_CASE("run comparison is deterministic and independent of threads") {
  auto c = small_config();
  const auto a = report_json(run_comparison(c));
  const auto b = report_json(run_comparison(c));
  CHECK(a == b);
  c.threads = 3;
  CHECK(report_json(run_comparison(c)) == a);
  c.seed = 2;
  CHECK(report_json(run_comparison(c)) != a);
}

TEST_CASE("strategies share inputs within a run") {
  const auto c = small_config();
  const auto report = run_comparison(c);
  const std::size_t T = static_cast<std::size_t>(c.mdp.horizon);
  for (std::size_t r = 0; r < static_cast<std::size_t>(c.runs); ++r) {
    const auto in = make_run_inputs(c, r);
    for (const auto& s : report.strategies) {
      const std::size_t per_run = s.ledgers.size() / c.runs;
      for (std::size_t k = 0; k < per_run; ++k) {
        const auto& l = s.ledgers[r * per_run + k];
        REQUIRE(l.slots.size() == T);
        for (std::size_t t = 0; t < T; ++t) {
          CHECK(l.slots[t].watched == in.trace.episode_at(t));
          CHECK(l.slots[t].load == in.loads[t]);
        }
      }
    }
  }
}

TEST_CASE("offline is cheapest on every run") {
  const auto report = run_comparison(small_config());
  const auto& off = report.at("offline");
  for (const auto& name : {"random", "heuristic", "online"}) {
    const auto& other = report.at(name);
    const std::size_t per_run = other.ledgers.size() / off.ledgers.size();
    for (std::size_t r = 0; r < off.ledgers.size(); ++r) {
      double mean = 0.0;
      for (std::size_t k = 0; k < per_run; ++k) mean += cost_summary(other.ledgers[r * per_run + k]).total;
      mean /= static_cast<double>(per_run);
      CHECK(cost_summary(off.ledgers[r]).total <= mean + 1e-9);
    }
  }
}

TEST_CASE("written artifacts are consistent with the report") {
  auto c = small_config();
  c.out_dir = scratch("artifacts");
  const auto report = run_comparison(c);
  write_comparison(report, c);
  CHECK(fs::exists(c.out_dir / "report.json"));
  CHECK(fs::exists(c.out_dir / "theta.bin"));
  CHECK(load_theta(c.out_dir / "theta.bin", c.mdp) == *report.first_theta);
  for (const auto& s : report.strategies) {
    std::ifstream csv(c.out_dir / ("per_slot_" + s.name + ".csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "slot,load,action_size,startup_delay,cost_total,cost_m,cost_q");
    double total = 0.0;
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
      REQUIRE(f.size() == 7);
      total += std::stod(f[4]);
      CHECK(std::stod(f[4]) == doctest::Approx(std::stod(f[5]) + c.cost.lambda1 * std::stod(f[6])).epsilon(1e-9));
      ++rows;
    }
    CHECK(rows == s.ledgers.size() * static_cast<std::size_t>(c.mdp.horizon));
    CHECK(std::abs(total / s.ledgers.size() - s.metrics.mean_total()) < 1e-6);
  }
  fs::remove_all(c.out_dir);
}

TEST_CASE("pre-trained weights skip replay") {
  auto c = small_config();
  c.strategies = {"online"};
  c.out_dir = scratch("theta");
  const auto trained = train_online(c, 0);
  save_theta(c.out_dir / "w.bin", trained.theta, c.mdp);
  c.theta_path = c.out_dir / "w.bin";
  const auto report = run_comparison(c);
  CHECK(report.at("online").training_runs == 0);
  CHECK_FALSE(report.first_theta.has_value());
  fs::remove_all(c.out_dir);
}

TEST_CASE("lambda1 sweep") {
  auto c = small_config();
  c.runs = 2;
  const std::vector<double> values{0.0, 0.6, 0.6};
  const auto rows = sweep_lambda1(c, values);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].monetary == rows[2].monetary);
  CHECK(rows[1].qoe == rows[2].qoe);
  CHECK(rows[0].total == rows[0].monetary);
  CHECK_THROWS_AS((sweep_lambda1(c, std::vector<double>{})), ConfigError);
  CHECK_THROWS_AS((sweep_lambda1(c, std::vector<double>{-1.0})), ConfigError);
}

TEST_CASE("forecast evaluation") {
  ExperimentConfig c;
  c.load.hours = 71;
  CHECK_THROWS_AS((forecast_eval(c)), ConfigError);
  c.load.hours = 120;
  c.load.noise_std = 0.0;
  const auto r = forecast_eval(c);
  CHECK(r.rolling.error.percent < 1.0);
  CHECK(r.window == 49);

  const fs::path dir = scratch("forecast");
  std::ofstream(dir / "flat.csv") << [] {
    std::string s = "hour,load\n";
    for (int h = 0; h < 100; ++h) s += std::to_string(h) + ",0.3\n";
    return s;
  }();
  c.load.csv = dir / "flat.csv";
  const auto flat = forecast_eval(c);
  CHECK(flat.rolling.error.percent == 0.0);
  CHECK(flat.rolling.degenerate_fits == flat.rolling.fits);
  fs::remove_all(dir);
}

TEST_CASE("case study") {
  const fs::path dir = scratch("case");
  // every third hour is saturated
  {
    std::ofstream out(dir / "load.csv");
    out << "hour,load\n";
    for (int h = 0; h < 60; ++h) out << h << ',' << (h % 3 == 0 ? 1.0 : 0.2 + 0.01 * (h % 7)) << '\n';
  }
  auto c = small_config();
  c.load.csv = dir / "load.csv";
  c.placement = Placement::kUniform;
  c.case_k = 2;
  const auto rows = case_study(c, 0);
  REQUIRE(rows.size() == static_cast<std::size_t>(c.mdp.horizon));
  bool saw_saturated = false;
  for (const auto& r : rows) {
    if (r.load >= 1.0) {
      saw_saturated = true;
      CHECK(r.prefetched.at("online") == 0);
      CHECK(r.prefetched.at("offline") == 0);
    } else {
      CHECK(r.prefetched.at("random") == 2);
    }
    for (const auto& [name, delay] : r.delay) {
      CHECK((delay == c.cost.d0 || delay == server_delay(r.load, c.cost)));
    }
    CHECK(r.delay_without_prefetch == server_delay(r.load, c.cost));
  }
  CHECK(saw_saturated);
  std::ostringstream csv;
  write_case_csv(csv, rows, c.strategies);
  CHECK(csv.str().rfind("slot,hour,load,watched,delay_none,prefetch_random", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("trace CSV input drives the runs") {
  const fs::path dir = scratch("trace");
  {
    std::ofstream out(dir / "trace.csv");
    out << "user_id,slot,episode\n";
    for (int t = 0; t < 8; ++t) out << "a," << t << ',' << 1 + t % 5 << '\n';
    for (int t = 0; t < 8; ++t) out << "b," << t << ',' << 3 << '\n';
  }
  auto c = small_config();
  c.trace_csv = dir / "trace.csv";
  const auto in0 = make_run_inputs(c, 0);
  const auto in1 = make_run_inputs(c, 1);
  CHECK(in0.trace.user_id == "a");
  CHECK(in1.trace.user_id == "b");
  CHECK(make_history(c, 0).size() == 1);
  CHECK(make_history(c, 0)[0].trace.user_id == "b");
  fs::remove_all(dir);
}
