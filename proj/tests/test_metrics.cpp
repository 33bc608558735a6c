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
#include <random>
#include <vector>

#include "apfetch/baselines.hpp"
#include "apfetch/metrics.hpp"
#include "apfetch/simulate.hpp"

using namespace apfetch;

namespace {

// Replays a fixed list of actions.
class Scripted final : public Policy {
 public:
  explicit Scripted(std::vector<PrefetchAction> actions) : actions_(std::move(actions)) {}
  PrefetchAction decide(const SystemState&, std::size_t slot, double) override { return actions_.at(slot); }

 private:
  std::vector<PrefetchAction> actions_;
};

WatchTrace trace_of(std::vector<int> episodes) {
  WatchTrace t;
  for (std::size_t i = 0; i < episodes.size(); ++i) t.slots.push_back({static_cast<std::int64_t>(i), episodes[i]});
  return t;
}

RunLedger run(std::vector<int> episodes, std::vector<PrefetchAction> actions, double load = 0.4,
              MdpConfig cfg = {10, 3, 3, 10}) {
  Scripted p(std::move(actions));
  const std::vector<double> loads(episodes.size(), load);
  return simulate(trace_of(std::move(episodes)), loads, cfg, CostParams{}, p);
}

}  // namespace

TEST_CASE("precision ratio") {
  SUBCASE("ten prefetches, eight consumed once") {
    RunLedger l;
    l.slots.resize(10);
    for (int i = 0; i < 10; ++i) l.prefetches.push_back({0, i + 1, i < 8 ? 1 : 0});
    CHECK(precision_ratio(l).value == doctest::Approx(0.8));
  }
  SUBCASE("a prefetch watched in two consecutive slots counts twice") {
    const auto l = run({1, 2, 2}, {PrefetchAction{2}, {}, {}});
    CHECK(useful_prefetches(l) == 2);
    CHECK(precision_ratio(l).value == 2.0);
    CHECK(precision_ratio(l, UsefulCounting::kOncePerPrefetch).value == 1.0);
  }
  SUBCASE("no prefetches") {
    const auto l = run({1, 2, 3}, {{}, {}, {}});
    const auto r = precision_ratio(l);
    CHECK(r.value == 0.0);
    CHECK(r.empty_denominator);
  }
}

TEST_CASE("hit ratio") {
  SUBCASE("no prefetches") { CHECK(hit_ratio(run({1, 2, 3}, {{}, {}, {}})).value == 0.0); }
  SUBCASE("24 hits out of 30") {
    std::vector<int> eps;
    std::vector<PrefetchAction> acts;
    for (int t = 0; t < 30; ++t) eps.push_back(1 + t % 10);
    for (int t = 0; t < 30; ++t) {
      // prefetch the next episode except before slots 5, 10, ..., 30 (six misses incl. slot 0)
      const bool skip = (t + 1) % 5 == 0;
      acts.push_back(skip ? PrefetchAction{} : PrefetchAction{eps[(t + 1) % 30]});
    }
    const auto l = run(eps, acts, 0.4, MdpConfig{10, 1, 3, 30});
    CHECK(hit_ratio(l).value == doctest::Approx(0.8));
  }
  SUBCASE("only prefetched items produce hits") {
    const auto l = run({1, 1}, {{}, {}});
    CHECK(hit_ratio(l).value == 0.0);
    const auto l2 = run({1, 2, 3}, {PrefetchAction{2, 3}, {}, {}});
    CHECK(hit_ratio(l2).numerator == 2);
  }
}

TEST_CASE("useful-prefetch identity") {
  std::mt19937_64 rng(4);
  const MdpConfig cfg{12, 3, 3, 20};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> eps;
    std::vector<PrefetchAction> acts;
    for (int t = 0; t < 20; ++t) eps.push_back(1 + static_cast<int>(rng() % 12));
    for (int t = 0; t < 20; ++t) {
      std::vector<int> a;
      for (int k = 0; k < 3; ++k) {
        if (rng() % 2) a.push_back(1 + static_cast<int>(rng() % 12));
      }
      acts.push_back(PrefetchAction(a));
    }
    const auto l = run(eps, acts, 0.5, cfg);
    const auto pr = precision_ratio(l);
    const auto hr = hit_ratio(l);
    CHECK(pr.numerator == hr.numerator);
    if (!pr.empty_denominator) {
      CHECK(pr.value * pr.denominator == doctest::Approx(static_cast<double>(pr.numerator)));
    }
    CHECK(hr.value * 20 == doctest::Approx(static_cast<double>(hr.numerator)));
    // every hit is attributed to some live prefetch
    std::size_t hits = 0;
    for (const auto& s : l.slots) hits += s.hit ? 1 : 0;
    CHECK(hits == hr.numerator);
  }
}

TEST_CASE("cost summary") {
  SUBCASE("single slot equals a direct stage cost") {
    const auto l = run({4}, {PrefetchAction{5, 6}});
    const auto s = cost_summary(l);
    const auto direct = stage_cost(SystemState{4, {}}, PrefetchAction{5, 6}, 0.4, CostParams{});
    CHECK(s.total == direct.total);
    CHECK(s.monetary == direct.monetary);
    CHECK(s.qoe == direct.qoe);
  }
  SUBCASE("totals match recomputed stage costs") {
    const std::vector<int> eps{1, 2, 2, 5, 6, 6, 7, 1};
    std::vector<PrefetchAction> acts{PrefetchAction{2}, PrefetchAction{3, 4}, {}, PrefetchAction{6, 7},
                                     {}, PrefetchAction{7}, {}, {}};
    const MdpConfig cfg{10, 3, 3, 10};
    const auto l = run(eps, acts, 0.4, cfg);
    CacheContents cache;
    double total = 0.0;
    for (std::size_t t = 0; t < eps.size(); ++t) {
      const auto c = stage_cost(SystemState{eps[t], cache}, acts[t], 0.4, CostParams{});
      total += c.total;
      cache = step_cache(cache, acts[t], cfg);
    }
    const auto s = cost_summary(l);
    CHECK(s.total == doctest::Approx(total).epsilon(1e-9));
    CHECK(s.total == doctest::Approx(s.monetary + 0.9 * s.qoe).epsilon(1e-9));
  }
  SUBCASE("lambda1 zero makes total equal monetary") {
    CostParams p;
    p.lambda1 = 0.0;
    Scripted policy({PrefetchAction{2}, {}, {}});
    const auto l = simulate(trace_of({1, 2, 4}), std::vector<double>(3, 0.3), MdpConfig{10, 3, 3, 3}, p, policy);
    const auto s = cost_summary(l);
    CHECK(s.total == s.monetary);
  }
}

TEST_CASE("clamped server delay is flagged") {
  const auto l = run({1, 2}, {{}, {}}, 0.01);
  CHECK(l.slots[0].delay_clamped);
  CHECK(l.slots[0].startup_delay == 0.05);
  CHECK(l.slots[0].cost.qoe == 0.0);
}

TEST_CASE("aggregate") {
  const auto a = run({1, 2, 2}, {PrefetchAction{2}, {}, {}});
  const auto b = run({1, 2, 3}, {PrefetchAction{2, 3}, PrefetchAction{4}, {}});
  const auto c = run({5, 9, 1}, {PrefetchAction{6}, {}, {}});
  Aggregate x, y;
  x.add(a);
  x.add(b);
  x.add(c);
  y.add(c);
  y.add(a);
  y.add(b);
  CHECK(x.precision() == y.precision());
  CHECK(x.hit_ratio() == y.hit_ratio());
  CHECK(x.mean_total() == doctest::Approx(y.mean_total()).epsilon(1e-12));
  CHECK(x.runs == 3);
  CHECK(x.useful == useful_prefetches(a) + useful_prefetches(b) + useful_prefetches(c));
  Aggregate z;
  Aggregate part;
  part.add(b);
  z.add(a);
  z.merge(part);
  z.add(c);
  CHECK(z.useful == x.useful);
  CHECK(z.mean_total() == doctest::Approx(x.mean_total()).epsilon(1e-12));
  const double m = x.mean_total();
  const double ta = cost_summary(a).total, tb = cost_summary(b).total, tc = cost_summary(c).total;
  const double var = ((ta - m) * (ta - m) + (tb - m) * (tb - m) + (tc - m) * (tc - m)) / 2.0;
  CHECK(x.std_total() == doctest::Approx(std::sqrt(var)).epsilon(1e-9));
}
