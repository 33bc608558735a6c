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

#include "apfetch/qlearning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apfetch/errors.hpp"
#include "apfetch/kernels.hpp"

namespace apfetch {

std::size_t FeatureVector::active() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), 1.0));
}

FeatureVector feature_extract(const SystemState& state, const MdpConfig& config) {
  const int block = config.ttl + 2;
  FeatureVector x;
  x.block = block;
  x.values.assign(static_cast<std::size_t>(config.episodes) * block, 0.0);
  for (int e = 1; e <= config.episodes; ++e) {
    const std::size_t base = static_cast<std::size_t>(e - 1) * block;
    if (e == state.watched) x.values[base] = 1.0;
    x.values[base + block - 1] = 1.0;  // not cached unless overwritten below
  }
  for (const auto& entry : state.cache) {
    const std::size_t base = static_cast<std::size_t>(entry.episode - 1) * block;
    x.values[base + block - 1] = 0.0;
    x.values[base + entry.lifetime] = 1.0;
  }
  return x;
}

ThetaMatrix ThetaMatrix::zeros(const MdpConfig& config) {
  return ThetaMatrix(kReducedActionCount,
                     static_cast<std::size_t>(config.episodes) * (config.ttl + 2));
}

double ThetaMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

void LearnParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
  if (!(epsilon0 >= 0.0 && epsilon0 < 1.0)) throw DomainError("epsilon0 must lie in [0, 1)");
  if (!(epsilon_decay >= 0.0)) throw DomainError("epsilon decay must be nonnegative");
  if (!(chi > 0.0)) throw DomainError("chi must be positive");
  if (max_sweeps < 1) throw DomainError("max_sweeps must be at least 1");
  if (!(divergence_bound > 0.0)) throw DomainError("divergence bound must be positive");
}

double q_value(const ThetaMatrix& theta, const FeatureVector& x, int action) {
  if (action < 0 || static_cast<std::size_t>(action) >= theta.rows()) {
    throw DomainError("action index out of range");
  }
  return kernels::dot(theta.row(static_cast<std::size_t>(action)), x.values);
}

int greedy_action(const ThetaMatrix& theta, const FeatureVector& x, std::span<const int> admissible) {
  if (admissible.empty()) throw DomainError("no admissible action");
  int best = admissible.front();
  double best_q = q_value(theta, x, best);
  for (int a : admissible.subspan(1)) {
    const double q = q_value(theta, x, a);
    if (q < best_q || (q == best_q && a < best)) {
      best_q = q;
      best = a;
    }
  }
  return best;
}

int epsilon_greedy(const ThetaMatrix& theta, const FeatureVector& x, std::span<const int> admissible,
                   double epsilon, Rng& rng) {
  if (admissible.empty()) throw DomainError("no admissible action");
  if (epsilon > 0.0 && uniform01(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, admissible.size() - 1);
    return admissible[pick(rng)];
  }
  return greedy_action(theta, x, admissible);
}

double td_error(const ThetaMatrix& theta, const FeatureVector& x, int action, double cost,
                const FeatureVector* next, std::span<const int> next_actions, double gamma) {
  double target = cost;
  if (next != nullptr) {
    const int a_next = greedy_action(theta, *next, next_actions);
    target += gamma * q_value(theta, *next, a_next);
  }
  return target - q_value(theta, x, action);
}

double td_update(ThetaMatrix& theta, const FeatureVector& x, int action, double cost,
                 const FeatureVector* next, std::span<const int> next_actions,
                 const LearnParams& learn) {
  const double delta = td_error(theta, x, action, cost, next, next_actions, learn.gamma);
  if (!std::isfinite(delta)) {
    throw TrainingError("non-finite TD error (cost " + std::to_string(cost) + ", action " +
                        std::to_string(action) + ")");
  }
  double step = learn.alpha;
  if (learn.normalize_step) {
    const double norm2 = kernels::dot(x.values, x.values);
    if (norm2 > 0.0) step /= norm2;
  }
  kernels::axpy(step * delta, x.values, theta.row(static_cast<std::size_t>(action)));
  return delta;
}

TrainResult replay_train(std::span<const Experience> history, const MdpConfig& config,
                         const CostParams& params, const LearnParams& learn, Rng& rng) {
  config.validate();
  params.validate();
  learn.validate();
  if (history.empty()) throw DomainError("replay needs at least one trace");
  for (const auto& h : history) {
    check_alignment(h.trace, h.loads);
    h.trace.validate(config.episodes);
  }

  TrainResult result;
  result.theta = ThetaMatrix::zeros(config);
  ThetaMatrix before = result.theta;
  double epsilon = learn.epsilon0;

  for (int sweep = 1; sweep <= learn.max_sweeps; ++sweep) {
    before = result.theta;
    for (const auto& h : history) {
      SystemState state{h.trace.episode_at(0), {}};
      FeatureVector x = feature_extract(state, config);
      for (std::size_t t = 0; t < h.trace.size(); ++t) {
        const auto admissible =
            admissible_reduced_indices(state.watched, config, params.saturated(h.loads[t]));
        const int a = epsilon_greedy(result.theta, x, admissible, epsilon, rng);
        const PrefetchAction action = *reduced_action(a, state.watched, config);
        const double g = stage_cost(state, action, h.loads[t], params).total;
        if (t + 1 == h.trace.size()) {
          // end of the trace: nothing to bootstrap from
          td_update(result.theta, x, a, g, nullptr, {}, learn);
          epsilon = std::max(0.0, epsilon - learn.epsilon_decay);
          break;
        }
        SystemState next{h.trace.episode_at(t + 1), step_cache(state.cache, action, config)};
        FeatureVector x_next = feature_extract(next, config);
        const auto next_actions = admissible_reduced_indices(next.watched, config);
        td_update(result.theta, x, a, g, &x_next, next_actions, learn);
        epsilon = std::max(0.0, epsilon - learn.epsilon_decay);
        state = std::move(next);
        x = std::move(x_next);
      }
    }
    const double bound = result.theta.max_abs();
    if (!(bound <= learn.divergence_bound)) {
      throw TrainingError("replay diverged: max |theta| = " + std::to_string(bound) +
                          " after sweep " + std::to_string(sweep));
    }
    result.sweeps = sweep;
    result.last_change = kernels::max_abs_diff(result.theta.data(), before.data());
    if (result.last_change < learn.chi) {
      result.converged = true;
      break;
    }
  }
  result.epsilon = epsilon;
  return result;
}

OnlineStep online_act(ThetaMatrix& theta, const SystemState& state, double load,
                      const SystemState* next, const MdpConfig& config, const CostParams& params,
                      const LearnParams& learn) {
  const FeatureVector x = feature_extract(state, config);
  const auto admissible = admissible_reduced_indices(state.watched, config, params.saturated(load));
  OnlineStep step;
  step.action = greedy_action(theta, x, admissible);
  step.cost = stage_cost(state, *reduced_action(step.action, state.watched, config), load, params);
  if (next == nullptr) {
    step.delta = td_update(theta, x, step.action, step.cost.total, nullptr, {}, learn);
    return step;
  }
  const FeatureVector x_next = feature_extract(*next, config);
  const auto next_actions = admissible_reduced_indices(next->watched, config);
  step.delta = td_update(theta, x, step.action, step.cost.total, &x_next, next_actions, learn);
  return step;
}

OnlinePolicy::OnlinePolicy(ThetaMatrix theta, const MdpConfig& config, const CostParams& params,
                           const LearnParams& learn, bool keep_learning)
    : theta_(std::move(theta)), config_(config), params_(params), learn_(learn),
      keep_learning_(keep_learning) {
  if (theta_.rows() != kReducedActionCount ||
      theta_.cols() != static_cast<std::size_t>(config.episodes) * (config.ttl + 2)) {
    throw DomainError("theta shape does not match the MDP config");
  }
}

PrefetchAction OnlinePolicy::decide(const SystemState& state, std::size_t, double load) {
  const FeatureVector x = feature_extract(state, config_);
  const auto admissible = admissible_reduced_indices(state.watched, config_, params_.saturated(load));
  last_action_ = greedy_action(theta_, x, admissible);
  return *reduced_action(last_action_, state.watched, config_);
}

void OnlinePolicy::observe(const Transition& tr) {
  if (!keep_learning_) return;
  // A suppressed action was never taken; learn about what actually happened.
  const int a = tr.action.empty() ? 0 : last_action_;
  const FeatureVector x = feature_extract(tr.state, config_);
  if (tr.next == nullptr) {
    td_update(theta_, x, a, tr.cost.total, nullptr, {}, learn_);
    return;
  }
  const FeatureVector x_next = feature_extract(*tr.next, config_);
  const auto next_actions = admissible_reduced_indices(tr.next->watched, config_);
  td_update(theta_, x, a, tr.cost.total, &x_next, next_actions, learn_);
}

}  // namespace apfetch
