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

// One-step-ahead load prediction with a multiplicative seasonal MA model on the
// doubly differenced series, (0,1,1)x(0,1,1) with a 24-hour season:
//
//   w_t = (1 - L)(1 - L^24) x_t
//   w_t = e_t + theta e_{t-1} + Theta e_{t-24} + theta Theta e_{t-25}

#include <cstddef>
#include <span>
#include <vector>

namespace apfetch {

inline constexpr std::size_t kSeasonLength = 24;
// Points lost to (1 - L)(1 - L^24).
inline constexpr std::size_t kDifferencingLoss = kSeasonLength + 1;
inline constexpr std::size_t kMinFitWindow = 49;
inline constexpr std::size_t kMinForecastHistory = kDifferencingLoss + 1;
inline constexpr double kMaBound = 0.99;

struct SarimaParams {
  double theta = 0.0;           // non-seasonal MA(1)
  double seasonal_theta = 0.0;  // seasonal MA(1) at lag 24
  bool degenerate = false;      // differenced window was identically zero
  double css = 0.0;             // conditional sum of squares at the optimum
};

/// x_t - x_{t-1} - x_{t-24} + x_{t-25}; output is 25 shorter than the input.
std::vector<double> difference(std::span<const double> series);

/// Inverse of difference() given the first 25 original values.
std::vector<double> integrate(std::span<const double> differenced, std::span<const double> initial);

/// Innovations of the MA recursion with pre-sample residuals set to zero.
std::vector<double> css_residuals(std::span<const double> differenced, double theta,
                                  double seasonal_theta);

double conditional_sum_of_squares(std::span<const double> differenced, double theta,
                                  double seasonal_theta);

/// Minimizes the conditional sum of squares over [-0.99, 0.99]^2 with a 0.05
/// grid followed by two sweeps of per-axis golden-section refinement.
SarimaParams fit_sarima(std::span<const double> window);

/// Prediction of the value following `history`, clamped at zero.
double forecast_one_step(const SarimaParams& params, std::span<const double> history);

struct MapeResult {
  double percent = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;  // points with a zero actual
};

MapeResult mape(std::span<const double> predictions, std::span<const double> actuals);

struct RollingForecast {
  std::vector<std::size_t> hours;  // index of the predicted point
  std::vector<double> predictions;
  std::vector<double> actuals;
  std::size_t fits = 0;
  std::size_t degenerate_fits = 0;
  MapeResult error;
};

/// Walks the series predicting each point from the preceding `window` values,
/// refitting every `refit_every` steps.
RollingForecast rolling_forecast(std::span<const double> series, std::size_t window = kMinFitWindow,
                                 std::size_t refit_every = 24);

}  // namespace apfetch
