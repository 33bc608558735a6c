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

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "apfetch/config.hpp"
#include "apfetch/load_forecast.hpp"
#include "apfetch/metrics.hpp"
#include "apfetch/qlearning.hpp"

namespace apfetch {

/// Trace and per-slot loads shared by every strategy within one run.
struct RunInputs {
  WatchTrace trace;
  std::vector<double> loads;
  std::vector<std::size_t> hours;  // hour of the load series hosting each slot
};

ServerLoadSeries make_load_series(const ExperimentConfig& config, std::size_t run);

/// Picks `count` distinct hours of `series`, ascending. Load-weighted placement
/// draws without replacement with probability proportional to the load.
std::vector<std::size_t> place_sessions(const ServerLoadSeries& series, std::size_t count,
                                        Placement placement, Rng& rng);

RunInputs make_run_inputs(const ExperimentConfig& config, std::size_t run);
std::vector<Experience> make_history(const ExperimentConfig& config, std::size_t run);

struct StrategyResult {
  std::string name;
  Aggregate metrics;
  std::vector<RunLedger> ledgers;  // run order; family members consecutive
  std::size_t training_runs = 0;
  std::size_t nonconverged = 0;
  std::size_t training_failures = 0;
  double mean_sweeps = 0.0;
};

struct ComparisonReport {
  std::uint64_t seed = 0;
  std::size_t runs = 0;
  std::vector<StrategyResult> strategies;
  std::optional<ThetaMatrix> first_theta;  // replay-trained weights of run 0

  const StrategyResult& at(std::string_view name) const;
};

ComparisonReport run_comparison(const ExperimentConfig& config);

std::string report_json(const ComparisonReport& report);
void write_per_slot_csv(std::ostream& out, const StrategyResult& strategy);
/// report.json, per_slot_<strategy>.csv and, when trained, theta.bin.
void write_comparison(const ComparisonReport& report, const ExperimentConfig& config);

struct SweepRow {
  double lambda1 = 0.0;
  double monetary = 0.0;
  double qoe = 0.0;
  double total = 0.0;
  double precision = 0.0;
  double hit_ratio = 0.0;
};

/// Online strategy at each lambda1 on identical seeds.
std::vector<SweepRow> sweep_lambda1(const ExperimentConfig& config, std::span<const double> values);
void write_sweep(const std::vector<SweepRow>& rows, const ExperimentConfig& config);

struct ForecastReport {
  RollingForecast rolling;
  std::size_t window = 0;
  std::size_t refit_every = 0;
};

ForecastReport forecast_eval(const ExperimentConfig& config);
void write_forecast(const ForecastReport& report, const ExperimentConfig& config);

/// Per-slot prefetch counts and startup delays of every strategy on one run.
struct CaseRow {
  std::size_t slot = 0;
  std::size_t hour = 0;
  double load = 0.0;
  int watched = 0;
  double delay_without_prefetch = 0.0;
  std::map<std::string, std::size_t> prefetched;
  std::map<std::string, double> delay;
};

std::vector<CaseRow> case_study(const ExperimentConfig& config, std::size_t run = 0);
void write_case_csv(std::ostream& out, const std::vector<CaseRow>& rows,
                    const std::vector<std::string>& strategies);

/// Replay training on the history of `run`, as used by the online strategy.
TrainResult train_online(const ExperimentConfig& config, std::size_t run);

/// Calls fn(i) for i in [0, n) on up to `threads` workers (0: hardware concurrency).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace apfetch
