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

// apfetch command-line front end.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apfetch/errors.hpp"
#include "apfetch/harness.hpp"
#include "apfetch/kernels.hpp"

namespace {

using apfetch::ExperimentConfig;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<std::string> out;
  std::optional<std::string> strategies;
  std::optional<int> threads;
  std::optional<std::string> theta;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--runs", f.runs, "number of seeded runs");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--strategies", f.strategies, "comma list of random,heuristic,offline,online");
  cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
  cmd->add_option("--theta", f.theta, "pre-trained online weights (skips replay training)");
  cmd->add_option("--set", f.overrides, "override a config key, as key=value (repeatable)");
}

ExperimentConfig build_config(const CommonFlags& f) {
  ExperimentConfig config;
  if (!f.config.empty()) config = apfetch::load_config(f.config);
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw apfetch::ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) config.set("seed", std::to_string(*f.seed));
  if (f.runs) config.set("runs", std::to_string(*f.runs));
  if (f.out) config.set("out", *f.out);
  if (f.strategies) config.set("strategies", *f.strategies);
  if (f.threads) config.set("threads", std::to_string(*f.threads));
  if (f.theta) config.set("theta", *f.theta);
  config.validate();
  return config;
}

void write_text_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  out << text;
  out.flush();
  if (!out) throw apfetch::ConfigError("cannot write " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wi-Fi access point video prefetching simulator"};
  app.require_subcommand(1);
  bool print_isa = false;
  app.add_flag("--print-isa", print_isa, "report the selected vector kernel set on stderr");

  CommonFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "compare strategies over seeded runs");
  add_common(simulate, sim_flags);

  CommonFlags sweep_flags;
  std::optional<std::string> sweep_values;
  auto* sweep = app.add_subcommand("sweep", "online strategy costs across lambda1 values");
  add_common(sweep, sweep_flags);
  sweep->add_option("--lambda1", sweep_values, "comma list of lambda1 values");

  CommonFlags forecast_flags;
  auto* forecast = app.add_subcommand("forecast", "rolling SARIMA forecast of the server load");
  add_common(forecast, forecast_flags);

  CommonFlags case_flags;
  std::size_t case_run = 0;
  auto* case_cmd = app.add_subcommand("case", "per-slot prefetch counts and delays for one run");
  add_common(case_cmd, case_flags);
  case_cmd->add_option("--run", case_run, "run index whose trace and loads are used");

  CommonFlags train_flags;
  std::size_t train_run = 0;
  std::string train_output;
  auto* train = app.add_subcommand("train", "replay-train online weights and save them");
  add_common(train, train_flags);
  train->add_option("--run", train_run, "run index whose history is replayed");
  train->add_option("--output", train_output, "weights file (default <out>/theta.bin)");

  CommonFlags trace_flags;
  std::size_t trace_length = 30;
  std::size_t trace_users = 1;
  std::string trace_output;
  auto* gen_trace = app.add_subcommand("gen-trace", "emit a synthetic watch trace CSV");
  add_common(gen_trace, trace_flags);
  gen_trace->add_option("--length", trace_length, "slots per user")->check(CLI::PositiveNumber);
  gen_trace->add_option("--users", trace_users, "number of users")->check(CLI::PositiveNumber);
  gen_trace->add_option("--output", trace_output, "CSV path (default stdout)");

  CommonFlags load_flags;
  std::string load_output;
  auto* gen_load = app.add_subcommand("gen-load", "emit a synthetic hourly server load CSV");
  add_common(gen_load, load_flags);
  gen_load->add_option("--output", load_output, "CSV path (default stdout)");

  auto* keys = app.add_subcommand("keys", "list configuration keys");

  CLI11_PARSE(app, argc, argv);

  if (print_isa) {
    std::cerr << "kernels: " << apfetch::kernels::isa_name(apfetch::kernels::active_isa()) << "\n";
  }

  try {
    if (*simulate) {
      const ExperimentConfig config = build_config(sim_flags);
      const auto report = apfetch::run_comparison(config);
      apfetch::write_comparison(report, config);
      std::cout << apfetch::report_json(report);
    } else if (*sweep) {
      CommonFlags flags = sweep_flags;
      if (sweep_values) flags.overrides.push_back("sweep_lambda1=" + *sweep_values);
      const ExperimentConfig config = build_config(flags);
      const auto rows = apfetch::sweep_lambda1(config, config.sweep_lambda1);
      apfetch::write_sweep(rows, config);
      std::cout << "lambda1,monetary_cost,qoe_cost,total_cost\n";
      for (const auto& r : rows) {
        std::cout << apfetch::format_double(r.lambda1) << ',' << apfetch::format_double(r.monetary)
                  << ',' << apfetch::format_double(r.qoe) << ',' << apfetch::format_double(r.total)
                  << '\n';
      }
    } else if (*forecast) {
      const ExperimentConfig config = build_config(forecast_flags);
      const auto report = apfetch::forecast_eval(config);
      apfetch::write_forecast(report, config);
      std::cout << "MAPE " << apfetch::format_double(report.rolling.error.percent) << "% over "
                << report.rolling.error.used << " forecasts\n";
    } else if (*case_cmd) {
      const ExperimentConfig config = build_config(case_flags);
      const auto rows = apfetch::case_study(config, case_run);
      std::filesystem::create_directories(config.out_dir);
      std::ostringstream csv;
      apfetch::write_case_csv(csv, rows, config.strategies);
      write_text_file((config.out_dir / "case.csv").string(), csv.str());
    } else if (*train) {
      const ExperimentConfig config = build_config(train_flags);
      const auto result = apfetch::train_online(config, train_run);
      std::filesystem::path path = train_output.empty() ? config.out_dir / "theta.bin"
                                                        : std::filesystem::path(train_output);
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      apfetch::save_theta(path, result.theta, config.mdp);
      std::cout << "sweeps " << result.sweeps << (result.converged ? " converged" : " not converged")
                << ", last change " << apfetch::format_double(result.last_change) << "\n";
    } else if (*gen_trace) {
      const ExperimentConfig config = build_config(trace_flags);
      std::vector<apfetch::WatchTrace> traces;
      for (std::size_t u = 0; u < trace_users; ++u) {
        auto rng = apfetch::make_rng(config.seed, u, apfetch::Stream::kTrace);
        int start = config.start_episode;
        if (start == 0) start = std::uniform_int_distribution<int>(1, config.mdp.episodes)(rng);
        traces.push_back(apfetch::generate_watch_trace(config.transitions, trace_length, start, rng,
                                                       "user" + std::to_string(u)));
      }
      std::ostringstream csv;
      apfetch::write_watch_trace_csv(csv, traces);
      write_text_file(trace_output, csv.str());
    } else if (*gen_load) {
      const ExperimentConfig config = build_config(load_flags);
      std::ostringstream csv;
      apfetch::write_server_load_csv(csv, apfetch::make_load_series(config, 0));
      write_text_file(load_output, csv.str());
    } else if (*keys) {
      for (auto key : apfetch::config_keys()) std::cout << key << "\n";
    }
  } catch (const apfetch::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
