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

#include <cmath>
#include <random>
#include <vector>

#include "apfetch/cost_model.hpp"
#include "apfetch/errors.hpp"
#include "apfetch/mdp.hpp"

using namespace apfetch;

namespace {

const double kLn2 = std::log(2.0);

}  // namespace

TEST_CASE("barrier") {
  CHECK(barrier(0.0, 1.0) == 0.0);
  CHECK(barrier(0.5, 1.0) == doctest::Approx(kLn2).epsilon(1e-12));
  CHECK(barrier(1.0, 2.0) == doctest::Approx(kLn2).epsilon(1e-12));
  CHECK_THROWS_AS((barrier(1.0, 1.0)), SaturationError);
  CHECK_THROWS_AS((barrier(1.5, 1.0)), SaturationError);
  CHECK_THROWS_AS((barrier(-0.1, 1.0)), DomainError);
}

TEST_CASE("transmission cost") {
  CostParams p;
  CHECK(transmission_cost(0, 0.7, p) == 0.0);
  CHECK(transmission_cost(0, 5.0, p) == 0.0);  // empty transfers are free even when saturated
  const double l = 1.0 - std::exp(-0.3);       // barrier 0.3
  CHECK(transmission_cost(1, l, p) == doctest::Approx(0.048).epsilon(1e-12));
  CHECK(transmission_cost(2, 0.5, p) == doctest::Approx(0.16 * kLn2 * 2).epsilon(1e-12));
  CHECK(transmission_cost(2, 0.5, p) == doctest::Approx(0.221807).epsilon(1e-6));
  CHECK(transmission_cost(3, 0.4, p) == doctest::Approx(3.0 * transmission_cost(1, 0.4, p)).epsilon(1e-15));
  CHECK_THROWS_AS((transmission_cost(1, 1.0, p)), SaturationError);
}

TEST_CASE("storage cost") {
  CostParams p;
  CHECK(storage_cost(0, p) == 0.0);
  CHECK(storage_cost(1, p) == 6e-5);
  CHECK(storage_cost(3, p) == doctest::Approx(1.8e-4).epsilon(1e-15));
}

TEST_CASE("latency cost and server delay") {
  CostParams p;
  CHECK(latency_cost(0, 0.4, p) == 0.0);
  CHECK(latency_cost(1, 1.0, p) == doctest::Approx(1.95).epsilon(1e-12));
  CHECK(latency_cost(1, 0.5, p) == doctest::Approx(0.95).epsilon(1e-12));
  CHECK_THROWS_AS((latency_cost(2, 0.5, p)), DomainError);
  // d1 = 2 l falls below d0 for l < 0.025; the delay is clamped so the cost never goes negative
  CHECK(server_delay(0.0, p) == 0.05);
  CHECK(server_delay_clamped(0.01, p));
  CHECK_FALSE(server_delay_clamped(0.03, p));
  CHECK(latency_cost(1, 0.01, p) == 0.0);
  CHECK(server_delay(2.0, p) == 2.0);  // loads beyond the threshold are clamped to it
}

TEST_CASE("competition cost branches") {
  CHECK(competition_cost(0, 1) == 0.0);
  CHECK(competition_cost(3, 0) == 0.0);
  CHECK(competition_cost(0, 0) == 0.0);
  CHECK(competition_cost(1, 1) == doctest::Approx(kLn2).epsilon(1e-15));
  CHECK(competition_cost(3, 1) == std::log(4.0));
  for (std::size_t x = 0; x < 10; ++x) CHECK(competition_cost(x, 0) == competition_cost(0 * x, 0));
  CHECK_THROWS_AS((competition_cost(1, 2)), DomainError);
}

TEST_CASE("stage cost examples") {
  CostParams p;
  SUBCASE("cache hit with no prefetch pays storage only") {
    SystemState s{4, {{4, 2}, {6, 1}}};
    const auto c = stage_cost(s, PrefetchAction{}, 0.6, p);
    CHECK(c.miss == 0);
    CHECK(c.monetary == storage_cost(2, p));
    CHECK(c.qoe == 0.0);
    CHECK(c.total == storage_cost(2, p));
  }
  SUBCASE("miss at half load on an empty cache") {
    SystemState s{3, {}};
    const auto c = stage_cost(s, PrefetchAction{}, 0.5, p);
    CHECK(c.miss == 1);
    CHECK(c.monetary == doctest::Approx(0.16 * kLn2).epsilon(1e-12));
    CHECK(c.qoe == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(c.total == doctest::Approx(0.16 * kLn2 + 0.9 * 0.95).epsilon(1e-12));
  }
  SUBCASE("miss with two prefetches") {
    SystemState s{3, {{5, 1}}};
    const PrefetchAction a{4, 5};
    const auto c = stage_cost(s, a, 0.5, p);
    // C^tr(2) + C^tr(1) + C^st(|{5} u {4,5}|)
    CHECK(c.monetary == doctest::Approx(0.16 * kLn2 * 3 + 2 * 6e-5).epsilon(1e-12));
    CHECK(c.qoe == doctest::Approx(0.95 + 0.02 * std::log(3.0)).epsilon(1e-12));
  }
  SUBCASE("lambda1 zero projects onto the monetary cost") {
    CostParams q = p;
    q.lambda1 = 0.0;
    SystemState s{3, {{1, 1}}};
    const auto c = stage_cost(s, PrefetchAction{4}, 0.3, q);
    CHECK(c.total == c.monetary);
  }
  SUBCASE("prefetching at saturation is inadmissible") {
    SystemState s{3, {}};
    CHECK_THROWS_AS((stage_cost(s, PrefetchAction{4}, 1.0, p)), SaturationError);
  }
  SUBCASE("a demand miss at saturation is charged at the cap") {
    SystemState s{3, {}};
    const auto c = stage_cost(s, PrefetchAction{}, 1.2, p);
    CHECK(std::isfinite(c.total));
    CHECK(c.monetary == doctest::Approx(p.beta * barrier(0.999, 1.0)).epsilon(1e-12));
    CHECK(c.qoe == doctest::Approx(1.95).epsilon(1e-12));
  }
}

TEST_CASE("stage cost invariants on random inputs") {
  CostParams p;
  MdpConfig cfg{10, 3, 3, 5};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> load(0.0, 0.999);
  for (int trial = 0; trial < 5000; ++trial) {
    SystemState s;
    s.watched = 1 + static_cast<int>(rng() % 10);
    for (int e = 1; e <= 10; ++e) {
      if (rng() % 3 == 0) s.cache.push_back({e, 1 + static_cast<int>(rng() % 3)});
    }
    std::vector<int> eps;
    for (int e = 1; e <= 10 && eps.size() < 3; ++e) {
      if (rng() % 4 == 0) eps.push_back(e);
    }
    const PrefetchAction a(eps);
    const double l = load(rng);
    const auto c = stage_cost(s, a, l, p);
    CHECK(c.monetary >= 0.0);
    CHECK(c.qoe >= 0.0);
    CHECK(c.total == doctest::Approx(c.monetary + p.lambda1 * c.qoe).epsilon(1e-12));
    CHECK(c.miss == (s.cached(s.watched) ? 0 : 1));
    // adding one more episode never lowers the cost
    if (eps.size() < 3) {
      for (int e = 1; e <= 10; ++e) {
        if (a.contains(e)) continue;
        auto bigger = eps;
        bigger.push_back(e);
        CHECK(stage_cost(s, PrefetchAction(bigger), l, p).total >= c.total);
        break;
      }
    }
  }
}

TEST_CASE("cost params validation") {
  CostParams p;
  CHECK_NOTHROW(p.validate());
  p.lambda2 = 1.0;
  CHECK_THROWS_AS((p.validate()), DomainError);
  p = {};
  p.beta = 0.0;
  CHECK_THROWS_AS((p.validate()), DomainError);
  p = {};
  p.load_threshold = -1.0;
  CHECK_THROWS_AS((p.validate()), DomainError);
}

TEST_CASE("beta calibration hits the target median") {
  std::vector<double> loads;
  for (int i = 0; i < 101; ++i) loads.push_back(0.009 * i);
  const double beta = calibrate_beta(loads, 1.0);
  std::vector<double> cost;
  for (double l : loads) cost.push_back(beta * barrier(l, 1.0));
  std::sort(cost.begin(), cost.end());
  CHECK(cost[50] == doctest::Approx(0.048).epsilon(1e-12));
  const double l03 = 1.0 - std::exp(-0.3);
  CHECK(calibrate_beta(std::vector<double>{l03, l03, l03}, 1.0) == doctest::Approx(0.16).epsilon(1e-12));
  CHECK_THROWS_AS((calibrate_beta(std::vector<double>{1.0, 2.0}, 1.0)), DomainError);
}
