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
#include <iosfwd>
#include <span>
#include <vector>

#include "apfetch/rng.hpp"
#include "apfetch/simulate.hpp"

namespace apfetch {

/// Binary state encoding. Each episode owns a block of ttl + 2 entries:
///   [watching, lifetime == 1, ..., lifetime == ttl, not cached]
/// Entries are stored as 0.0 / 1.0 so they feed the dot-product kernels directly.
struct FeatureVector {
  std::vector<double> values;
  int block = 0;

  std::size_t size() const { return values.size(); }
  bool bit(std::size_t i) const { return values[i] != 0.0; }
  std::size_t active() const;
};

FeatureVector feature_extract(const SystemState& state, const MdpConfig& config);

/// Linear Q weights, one row per reduced action, row-major.
class ThetaMatrix {
 public:
  ThetaMatrix() = default;
  ThetaMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  static ThetaMatrix zeros(const MdpConfig& config);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  double max_abs() const;

  bool operator==(const ThetaMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LearnParams {
  double alpha = 0.5;
  double gamma = 0.99;
  double epsilon0 = 0.5;
  double epsilon_decay = 5e-4;  // subtracted per learning slot, floored at 0
  double chi = 1e-4;            // convergence threshold on max |change| per sweep
  int max_sweeps = 500;
  double divergence_bound = 1e6;
  // Scale each step by 1 / |x|^2 so that alpha is the fraction of the TD
  // error absorbed by Q(s, a). Every feature vector has m + 1 active bits, so
  // this is a constant rescaling of alpha.
  bool normalize_step = true;

  void validate() const;
};

double q_value(const ThetaMatrix& theta, const FeatureVector& x, int action);

/// Lowest-index argmin of Q over `admissible`.
int greedy_action(const ThetaMatrix& theta, const FeatureVector& x, std::span<const int> admissible);

/// Greedy with probability 1 - epsilon, otherwise uniform over `admissible`.
int epsilon_greedy(const ThetaMatrix& theta, const FeatureVector& x, std::span<const int> admissible,
                   double epsilon, Rng& rng);

/// delta = gamma * min_a' Q(s', a') + g - Q(s, a). With `next` null the target
/// is g alone.
double td_error(const ThetaMatrix& theta, const FeatureVector& x, int action, double cost,
                const FeatureVector* next, std::span<const int> next_actions, double gamma);

/// Moves row `action` by step * delta * x(s) and returns delta. Other rows are
/// untouched. Throws TrainingError on a non-finite delta.
double td_update(ThetaMatrix& theta, const FeatureVector& x, int action, double cost,
                 const FeatureVector* next, std::span<const int> next_actions,
                 const LearnParams& learn);

/// A recorded viewing history with the load at each of its slots.
struct Experience {
  WatchTrace trace;
  std::vector<double> loads;
};

struct TrainResult {
  ThetaMatrix theta;
  int sweeps = 0;
  bool converged = false;
  double last_change = 0.0;
  double epsilon = 0.0;
};

/// Experience replay: sweeps over the histories with epsilon-greedy actions
/// and TD updates until a whole sweep moves no weight by chi or more.
TrainResult replay_train(std::span<const Experience> history, const MdpConfig& config,
                         const CostParams& params, const LearnParams& learn, Rng& rng);

struct OnlineStep {
  int action = 0;
  StageCost cost;
  double delta = 0.0;
};

/// One greedy online step: act, pay the stage cost and, when the next state
/// is known, update theta.
OnlineStep online_act(ThetaMatrix& theta, const SystemState& state, double load,
                      const SystemState* next, const MdpConfig& config, const CostParams& params,
                      const LearnParams& learn);

/// Greedy policy over a trained theta that keeps learning from what it observes.
class OnlinePolicy final : public Policy {
 public:
  OnlinePolicy(ThetaMatrix theta, const MdpConfig& config, const CostParams& params,
               const LearnParams& learn, bool keep_learning = true);
  PrefetchAction decide(const SystemState& state, std::size_t slot, double load) override;
  void observe(const Transition& transition) override;
  const ThetaMatrix& theta() const { return theta_; }

 private:
  ThetaMatrix theta_;
  MdpConfig config_;
  CostParams params_;
  LearnParams learn_;
  bool keep_learning_;
  int last_action_ = 0;
};

// Binary artifact: "APQT", u32 version, u32 episodes, u32 ttl, u32 rows,
// u32 cols, then rows * cols little-endian doubles, row-major.
void write_theta(std::ostream& out, const ThetaMatrix& theta, const MdpConfig& config);
ThetaMatrix read_theta(std::istream& in, const MdpConfig& config);
void save_theta(const std::filesystem::path& path, const ThetaMatrix& theta, const MdpConfig& config);
ThetaMatrix load_theta(const std::filesystem::path& path, const MdpConfig& config);

}  // namespace apfetch
