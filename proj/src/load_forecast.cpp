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

#include "apfetch/load_forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "apfetch/errors.hpp"
#include "apfetch/kernels.hpp"

namespace apfetch {

std::vector<double> difference(std::span<const double> series) {
  if (series.size() < kDifferencingLoss + 1) {
    throw DomainError("differencing needs at least 26 points, got " + std::to_string(series.size()));
  }
  return kernels::seasonal_difference(series);
}

std::vector<double> integrate(std::span<const double> differenced, std::span<const double> initial) {
  if (initial.size() != kDifferencingLoss) throw DomainError("integration needs 25 initial values");
  std::vector<double> x(initial.begin(), initial.end());
  x.reserve(initial.size() + differenced.size());
  for (double w : differenced) {
    const std::size_t t = x.size();
    x.push_back(w + x[t - 1] + x[t - kSeasonLength] - x[t - kSeasonLength - 1]);
  }
  return x;
}

std::vector<double> css_residuals(std::span<const double> w, double theta, double seasonal_theta) {
  constexpr std::size_t s = kSeasonLength;
  std::vector<double> e(w.size(), 0.0);
  const double cross = theta * seasonal_theta;
  for (std::size_t t = 0; t < w.size(); ++t) {
    double v = w[t];
    if (t >= 1) v -= theta * e[t - 1];
    if (t >= s) v -= seasonal_theta * e[t - s];
    if (t >= s + 1) v -= cross * e[t - s - 1];
    e[t] = v;
  }
  return e;
}

double conditional_sum_of_squares(std::span<const double> w, double theta, double seasonal_theta) {
  const auto e = css_residuals(w, theta, seasonal_theta);
  return kernels::dot(e, e);
}

namespace {

template <typename F>
double golden_section(F&& f, double lo, double hi, int iterations) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

}  // namespace

SarimaParams fit_sarima(std::span<const double> window) {
  if (window.size() < kMinFitWindow) {
    throw DomainError("fit window needs at least 49 points, got " + std::to_string(window.size()));
  }
  const std::vector<double> w = difference(window);
  if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) {
    return SarimaParams{0.0, 0.0, true, 0.0};
  }

  constexpr double kStep = 0.05;
  std::vector<double> grid;
  grid.push_back(-kMaBound);
  for (int k = -19; k <= 19; ++k) grid.push_back(k * kStep);
  grid.push_back(kMaBound);

  double best_theta = 0.0;
  double best_seasonal = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (double th : grid) {
    for (double sth : grid) {
      const double css = conditional_sum_of_squares(w, th, sth);
      if (css < best) {
        best = css;
        best_theta = th;
        best_seasonal = sth;
      }
    }
  }

  for (int sweep = 0; sweep < 2; ++sweep) {
    const double lo_t = std::max(-kMaBound, best_theta - kStep);
    const double hi_t = std::min(kMaBound, best_theta + kStep);
    const double th = golden_section(
        [&](double v) { return conditional_sum_of_squares(w, v, best_seasonal); }, lo_t, hi_t, 30);
    if (const double css = conditional_sum_of_squares(w, th, best_seasonal); css < best) {
      best = css;
      best_theta = th;
    }
    const double lo_s = std::max(-kMaBound, best_seasonal - kStep);
    const double hi_s = std::min(kMaBound, best_seasonal + kStep);
    const double sth = golden_section(
        [&](double v) { return conditional_sum_of_squares(w, best_theta, v); }, lo_s, hi_s, 30);
    if (const double css = conditional_sum_of_squares(w, best_theta, sth); css < best) {
      best = css;
      best_seasonal = sth;
    }
  }
  return SarimaParams{best_theta, best_seasonal, false, best};
}

double forecast_one_step(const SarimaParams& params, std::span<const double> history) {
  if (history.size() < kMinForecastHistory) {
    throw DomainError("forecast needs at least 26 history points, got " +
                      std::to_string(history.size()));
  }
  constexpr std::size_t s = kSeasonLength;
  const std::vector<double> w = difference(history);
  const std::vector<double> e = css_residuals(w, params.theta, params.seasonal_theta);
  const std::size_t n = history.size();
  const std::size_t m = e.size();
  // Innovation terms that survive into w_{T+1}; anything before the sample is zero.
  auto eps = [&](std::size_t back) { return back < m ? e[m - 1 - back] : 0.0; };
  const double ma = params.theta * eps(0) + params.seasonal_theta * eps(s - 1) +
                    params.theta * params.seasonal_theta * eps(s);
  const double level = history[n - 1] + history[n - s] - history[n - s - 1];
  return std::max(0.0, level + ma);
}

MapeResult mape(std::span<const double> predictions, std::span<const double> actuals) {
  if (predictions.size() != actuals.size() || actuals.empty()) {
    throw DomainError("MAPE needs equal-length, nonempty inputs");
  }
  MapeResult r;
  double sum = 0.0;
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    if (actuals[i] < 0.0) throw DomainError("MAPE actuals must be nonnegative");
    if (actuals[i] == 0.0) {
      ++r.excluded;
      continue;
    }
    sum += std::fabs(predictions[i] - actuals[i]) / actuals[i];
    ++r.used;
  }
  if (r.used == 0) throw DomainError("MAPE undefined: every actual is zero");
  r.percent = 100.0 * sum / static_cast<double>(r.used);
  return r;
}

RollingForecast rolling_forecast(std::span<const double> series, std::size_t window,
                                 std::size_t refit_every) {
  if (window < kMinFitWindow) throw DomainError("rolling window must be at least 49");
  if (refit_every == 0) throw DomainError("refit cadence must be positive");
  if (series.size() <= window) throw DomainError("series shorter than the forecast window");
  RollingForecast out;
  SarimaParams params;
  for (std::size_t t = window; t < series.size(); ++t) {
    const auto history = series.subspan(t - window, window);
    if ((t - window) % refit_every == 0) {
      params = fit_sarima(history);
      ++out.fits;
      if (params.degenerate) ++out.degenerate_fits;
    }
    out.hours.push_back(t);
    out.predictions.push_back(forecast_one_step(params, history));
    out.actuals.push_back(series[t]);
  }
  out.error = mape(out.predictions, out.actuals);
  return out;
}

}  // namespace apfetch
