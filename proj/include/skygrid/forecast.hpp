#pragma once

// Additive Holt-Winters (triple exponential smoothing) for solar power.

#include <stdexcept>
#include <vector>

#include "skygrid/scenario.hpp"

namespace skygrid {

class ForecastNotReady : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HoltWinters {
 public:
  /// `season` is the period L in steps (>= 2); forecasts are clamped to
  /// [0, upper].
  HoltWinters(int season, const ForecastParams& params, double upper);

  /// Consumes one observation. The first L observations initialize level
  /// (their mean) and seasonal offsets (deviations from that mean), trend 0.
  void update(double y);

  /// Two full seasons consumed.
  bool ready() const { return observations_ >= 2 * season_; }
  long observations() const { return observations_; }

  /// h-step forecasts for h = 1..n: level + h*trend + seasonal slot of the
  /// target step, clamped. Throws ForecastNotReady before ready().
  std::vector<double> predict(int n) const;
  /// Same without the clamp.
  std::vector<double> predict_raw(int n) const;

  double level() const { return level_; }
  double trend() const { return trend_; }
  const std::vector<double>& seasonal() const { return seasonal_; }
  int season() const { return season_; }

 private:
  int season_;
  ForecastParams params_;
  double upper_;
  double level_ = 0.0;
  double trend_ = 0.0;
  std::vector<double> seasonal_;
  std::vector<double> warmup_;
  long observations_ = 0;
};

}  // namespace skygrid
