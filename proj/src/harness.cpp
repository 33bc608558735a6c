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

#include "apfetch/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "apfetch/baselines.hpp"
#include "apfetch/errors.hpp"
#include "apfetch/offline.hpp"

namespace apfetch {

using Json = nlohmann::ordered_json;

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

ServerLoadSeries make_load_series(const ExperimentConfig& config, std::size_t run) {
  if (config.load.csv) return load_server_load_csv(*config.load.csv);
  Rng rng = make_rng(config.seed, run, Stream::kLoad);
  const auto base = default_daily_profile(config.cost.load_threshold);
  return generate_server_load(config.load.hours, base, config.load.noise_std,
                              config.load.weekly_amplitude, rng);
}

std::vector<std::size_t> place_sessions(const ServerLoadSeries& series, std::size_t count,
                                        Placement placement, Rng& rng) {
  const std::size_t n = series.size();
  if (count > n) {
    throw DomainError("cannot place " + std::to_string(count) + " sessions in " + std::to_string(n) +
                      " hours");
  }
  std::vector<double> weight(n, 1.0);
  if (placement == Placement::kLoadWeighted) {
    double total = 0.0;
    for (std::size_t h = 0; h < n; ++h) total += weight[h] = series.values[h];
    if (!(total > 0.0)) std::fill(weight.begin(), weight.end(), 1.0);
  }
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> hours;
  hours.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    double total = 0.0;
    for (std::size_t h = 0; h < n; ++h) {
      if (!taken[h]) total += weight[h];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double u = uniform01(rng) * total;
      double cdf = 0.0;
      for (std::size_t h = 0; h < n; ++h) {
        if (taken[h] || weight[h] <= 0.0) continue;
        cdf += weight[h];
        pick = h;
        if (u < cdf) break;
      }
    } else {
      // only zero-load hours remain
      for (std::size_t h = 0; h < n && pick == n; ++h) {
        if (!taken[h]) pick = h;
      }
    }
    taken[pick] = true;
    hours.push_back(pick);
  }
  std::sort(hours.begin(), hours.end());
  return hours;
}

namespace {

int draw_start(const ExperimentConfig& config, Rng& rng) {
  if (config.start_episode > 0) return config.start_episode;
  std::uniform_int_distribution<int> pick(1, config.mdp.episodes);
  return pick(rng);
}

std::vector<WatchTrace> file_traces(const ExperimentConfig& config) {
  return load_watch_traces_csv(*config.trace_csv, config.mdp.episodes);
}

std::vector<double> loads_at(const ServerLoadSeries& series, const std::vector<std::size_t>& hours) {
  std::vector<double> loads;
  loads.reserve(hours.size());
  for (std::size_t h : hours) loads.push_back(series.values[h]);
  return loads;
}

}  // namespace

RunInputs make_run_inputs(const ExperimentConfig& config, std::size_t run) {
  const ServerLoadSeries series = make_load_series(config, run);
  RunInputs in;
  if (config.trace_csv) {
    const auto traces = file_traces(config);
    in.trace = traces[run % traces.size()];
  } else {
    Rng rng = make_rng(config.seed, run, Stream::kTrace);
    const int start = draw_start(config, rng);
    in.trace = generate_watch_trace(config.transitions, static_cast<std::size_t>(config.mdp.horizon),
                                    start, rng, "run" + std::to_string(run));
  }
  Rng placement = make_rng(config.seed, run, Stream::kPlacement);
  in.hours = place_sessions(series, in.trace.size(), config.placement, placement);
  in.loads = loads_at(series, in.hours);
  return in;
}

std::vector<Experience> make_history(const ExperimentConfig& config, std::size_t run) {
  const ServerLoadSeries series = make_load_series(config, run);
  Rng rng = make_rng(config.seed, run, Stream::kHistory);
  std::vector<Experience> history;
  if (config.trace_csv) {
    const auto traces = file_traces(config);
    if (traces.size() > 1) {
      for (std::size_t i = 0; i < traces.size(); ++i) {
        if (i == run % traces.size()) continue;
        auto hours = place_sessions(series, traces[i].size(), config.placement, rng);
        history.push_back({traces[i], loads_at(series, hours)});
      }
      return history;
    }
  }
  for (int i = 0; i < config.history_traces; ++i) {
    const int start = draw_start(config, rng);
    WatchTrace trace = generate_watch_trace(config.transitions,
                                            static_cast<std::size_t>(config.mdp.horizon), start, rng,
                                            "history" + std::to_string(i));
    auto hours = place_sessions(series, trace.size(), config.placement, rng);
    history.push_back({std::move(trace), loads_at(series, hours)});
  }
  return history;
}

TrainResult train_online(const ExperimentConfig& config, std::size_t run) {
  const auto history = make_history(config, run);
  Rng explore = make_rng(config.seed, run, Stream::kExploration);
  return replay_train(history, config.mdp, config.cost, config.learn, explore);
}

const StrategyResult& ComparisonReport::at(std::string_view name) const {
  for (const auto& s : strategies) {
    if (s.name == name) return s;
  }
  throw DomainError("strategy not in report: " + std::string(name));
}

namespace {

struct OnlineTraining {
  ThetaMatrix theta;
  bool trained = false;
  bool converged = false;
  bool failed = false;
  int sweeps = 0;
};

OnlineTraining online_weights(const ExperimentConfig& config, std::size_t run) {
  OnlineTraining out;
  if (config.theta_path) {
    out.theta = load_theta(*config.theta_path, config.mdp);
    return out;
  }
  out.trained = true;
  try {
    TrainResult r = train_online(config, run);
    out.theta = std::move(r.theta);
    out.converged = r.converged;
    out.sweeps = r.sweeps;
  } catch (const TrainingError&) {
    out.failed = true;
    out.theta = ThetaMatrix::zeros(config.mdp);
  }
  return out;
}

struct RunOutput {
  std::vector<std::vector<RunLedger>> ledgers;  // per configured strategy
  OnlineTraining training;
};

RunOutput run_once(const ExperimentConfig& config, std::size_t run) {
  const RunInputs in = make_run_inputs(config, run);
  RunOutput out;
  for (const auto& name : config.strategies) {
    std::vector<RunLedger> ledgers;
    if (name == "random") {
      Rng rng = make_rng(config.seed, run, Stream::kRandomPolicy);
      ledgers = evaluate_fixed_family(in.trace, in.loads, config.mdp, config.cost, rng,
                                      config.family_repeats)
                    .ledgers;
    } else if (name == "heuristic") {
      Rng rng = make_rng(config.seed, run, Stream::kHeuristicPolicy);
      ledgers = evaluate_heuristic_family(in.trace, in.loads, config.mdp, config.cost, rng,
                                          config.family_repeats)
                    .ledgers;
    } else if (name == "offline") {
      const OfflineSolution sol = offline_solve(in.trace, in.loads, config.mdp, config.cost);
      OfflinePolicy policy(sol, config.mdp);
      ledgers.push_back(simulate(in.trace, in.loads, config.mdp, config.cost, policy));
    } else if (name == "online") {
      out.training = online_weights(config, run);
      OnlinePolicy policy(out.training.theta, config.mdp, config.cost, config.learn);
      ledgers.push_back(simulate(in.trace, in.loads, config.mdp, config.cost, policy));
    }
    out.ledgers.push_back(std::move(ledgers));
  }
  return out;
}

}  // namespace

ComparisonReport run_comparison(const ExperimentConfig& config) {
  config.validate();
  const std::size_t runs = static_cast<std::size_t>(config.runs);
  std::vector<RunOutput> outputs(runs);
  parallel_for(runs, config.threads, [&](std::size_t r) { outputs[r] = run_once(config, r); });

  ComparisonReport report;
  report.seed = config.seed;
  report.runs = runs;
  for (std::size_t s = 0; s < config.strategies.size(); ++s) {
    StrategyResult res;
    res.name = config.strategies[s];
    double sweeps = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
      for (auto& ledger : outputs[r].ledgers[s]) {
        res.metrics.add(ledger);
        res.ledgers.push_back(std::move(ledger));
      }
      if (res.name == "online" && outputs[r].training.trained) {
        ++res.training_runs;
        if (outputs[r].training.failed) ++res.training_failures;
        else if (!outputs[r].training.converged) ++res.nonconverged;
        sweeps += outputs[r].training.sweeps;
      }
    }
    if (res.training_runs > 0) res.mean_sweeps = sweeps / static_cast<double>(res.training_runs);
    report.strategies.push_back(std::move(res));
  }
  if (!outputs.empty() && outputs[0].training.trained && !outputs[0].training.failed) {
    report.first_theta = outputs[0].training.theta;
  }
  return report;
}

std::string report_json(const ComparisonReport& report) {
  Json root = Json::object();
  for (const auto& s : report.strategies) {
    const Aggregate& m = s.metrics;
    Json j;
    j["precision"] = m.precision();
    j["hit_ratio"] = m.hit_ratio();
    j["total_cost"] = m.mean_total();
    j["monetary_cost"] = m.mean_monetary();
    j["qoe_cost"] = m.mean_qoe();
    j["n_runs"] = report.runs;
    j["seed_base"] = report.seed;
    j["total_cost_std"] = m.std_total();
    j["precision_strict"] = m.precision_strict();
    j["simulated_runs"] = m.runs;
    j["prefetches_per_run"] = m.runs == 0 ? 0.0 : static_cast<double>(m.prefetched) / m.runs;
    j["suppressed_actions"] = m.suppressed_actions;
    j["clamped_delays"] = m.clamped_delays;
    if (s.name == "online") {
      j["training_runs"] = s.training_runs;
      j["nonconverged_runs"] = s.nonconverged;
      j["training_failures"] = s.training_failures;
      j["mean_sweeps"] = s.mean_sweeps;
    }
    root[s.name] = std::move(j);
  }
  return root.dump(2) + "\n";
}

void write_per_slot_csv(std::ostream& out, const StrategyResult& strategy) {
  out << "slot,load,action_size,startup_delay,cost_total,cost_m,cost_q\n";
  for (const auto& ledger : strategy.ledgers) {
    for (const auto& rec : ledger.slots) {
      out << rec.slot << ',' << format_double(rec.load) << ',' << rec.action.size() << ','
          << format_double(rec.startup_delay) << ',' << format_double(rec.cost.total) << ','
          << format_double(rec.cost.monetary) << ',' << format_double(rec.cost.qoe) << '\n';
    }
  }
}

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace

void write_comparison(const ComparisonReport& report, const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  const auto json_path = config.out_dir / "report.json";
  auto json = open_out(json_path);
  json << report_json(report);
  finish(json, json_path);
  for (const auto& s : report.strategies) {
    const auto path = config.out_dir / ("per_slot_" + s.name + ".csv");
    auto out = open_out(path);
    write_per_slot_csv(out, s);
    finish(out, path);
  }
  if (report.first_theta) save_theta(config.out_dir / "theta.bin", *report.first_theta, config.mdp);
}

std::vector<SweepRow> sweep_lambda1(const ExperimentConfig& config, std::span<const double> values) {
  if (values.empty()) throw ConfigError("lambda1 sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (double lambda1 : values) {
    if (!(lambda1 >= 0.0)) throw ConfigError("lambda1 values must be nonnegative");
    ExperimentConfig c = config;
    c.cost.lambda1 = lambda1;
    c.strategies = {"online"};
    const ComparisonReport report = run_comparison(c);
    const Aggregate& m = report.at("online").metrics;
    rows.push_back({lambda1, m.mean_monetary(), m.mean_qoe(), m.mean_total(), m.precision(),
                    m.hit_ratio()});
  }
  return rows;
}

void write_sweep(const std::vector<SweepRow>& rows, const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back({{"lambda1", r.lambda1}, {"monetary_cost", r.monetary}, {"qoe_cost", r.qoe},
                   {"total_cost", r.total}, {"precision", r.precision}, {"hit_ratio", r.hit_ratio},
                   {"n_runs", config.runs}, {"seed_base", config.seed}});
  }
  const auto json_path = config.out_dir / "sweep.json";
  auto json = open_out(json_path);
  json << arr.dump(2) << "\n";
  finish(json, json_path);
  const auto csv_path = config.out_dir / "sweep.csv";
  auto csv = open_out(csv_path);
  csv << "lambda1,monetary_cost,qoe_cost,total_cost,precision,hit_ratio\n";
  for (const auto& r : rows) {
    csv << format_double(r.lambda1) << ',' << format_double(r.monetary) << ','
        << format_double(r.qoe) << ',' << format_double(r.total) << ','
        << format_double(r.precision) << ',' << format_double(r.hit_ratio) << '\n';
  }
  finish(csv, csv_path);
}

ForecastReport forecast_eval(const ExperimentConfig& config) {
  config.validate();
  const ServerLoadSeries series = make_load_series(config, 0);
  if (series.size() < 72) {
    throw ConfigError("forecast evaluation needs at least 72 hours of load, got " +
                      std::to_string(series.size()));
  }
  ForecastReport report;
  report.window = kMinFitWindow;
  report.refit_every = 24;
  report.rolling = rolling_forecast(series.values, report.window, report.refit_every);
  return report;
}

void write_forecast(const ForecastReport& report, const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  const auto& r = report.rolling;
  Json j;
  j["mape_percent"] = r.error.percent;
  j["points"] = r.error.used;
  j["excluded_zero_actuals"] = r.error.excluded;
  j["fits"] = r.fits;
  j["degenerate_fits"] = r.degenerate_fits;
  j["window"] = report.window;
  j["refit_every"] = report.refit_every;
  const auto json_path = config.out_dir / "forecast.json";
  auto json = open_out(json_path);
  json << j.dump(2) << "\n";
  finish(json, json_path);
  const auto csv_path = config.out_dir / "forecast.csv";
  auto csv = open_out(csv_path);
  csv << "hour,actual,predicted\n";
  for (std::size_t i = 0; i < r.hours.size(); ++i) {
    csv << r.hours[i] << ',' << format_double(r.actuals[i]) << ','
        << format_double(r.predictions[i]) << '\n';
  }
  finish(csv, csv_path);
}

std::vector<CaseRow> case_study(const ExperimentConfig& config, std::size_t run) {
  config.validate();
  const RunInputs in = make_run_inputs(config, run);
  std::vector<CaseRow> rows(in.trace.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    rows[t].slot = t;
    rows[t].hour = in.hours[t];
    rows[t].load = in.loads[t];
    rows[t].watched = in.trace.episode_at(t);
    rows[t].delay_without_prefetch = server_delay(in.loads[t], config.cost);
  }
  for (const auto& name : config.strategies) {
    RunLedger ledger;
    if (name == "random") {
      RandomFixedPolicy p(config.case_k, config.mdp, make_rng(config.seed, run, Stream::kRandomPolicy));
      ledger = simulate(in.trace, in.loads, config.mdp, config.cost, p);
    } else if (name == "heuristic") {
      HeuristicPolicy p(config.case_k, config.mdp, make_rng(config.seed, run, Stream::kHeuristicPolicy));
      ledger = simulate(in.trace, in.loads, config.mdp, config.cost, p);
    } else if (name == "offline") {
      const OfflineSolution sol = offline_solve(in.trace, in.loads, config.mdp, config.cost);
      OfflinePolicy p(sol, config.mdp);
      ledger = simulate(in.trace, in.loads, config.mdp, config.cost, p);
    } else if (name == "online") {
      OnlineTraining w = online_weights(config, run);
      OnlinePolicy p(std::move(w.theta), config.mdp, config.cost, config.learn);
      ledger = simulate(in.trace, in.loads, config.mdp, config.cost, p);
    }
    for (std::size_t t = 0; t < rows.size(); ++t) {
      rows[t].prefetched[name] = ledger.slots[t].action.size();
      rows[t].delay[name] = ledger.slots[t].startup_delay;
    }
  }
  return rows;
}

void write_case_csv(std::ostream& out, const std::vector<CaseRow>& rows,
                    const std::vector<std::string>& strategies) {
  out << "slot,hour,load,watched,delay_none";
  for (const auto& s : strategies) out << ",prefetch_" << s;
  for (const auto& s : strategies) out << ",delay_" << s;
  out << '\n';
  for (const auto& r : rows) {
    out << r.slot << ',' << r.hour << ',' << format_double(r.load) << ',' << r.watched << ','
        << format_double(r.delay_without_prefetch);
    for (const auto& s : strategies) out << ',' << r.prefetched.at(s);
    for (const auto& s : strategies) out << ',' << format_double(r.delay.at(s));
    out << '\n';
  }
}

}  // namespace apfetch
