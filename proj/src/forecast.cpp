#include "skygrid/forecast.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace skygrid {

HoltWinters::HoltWinters(int season, const ForecastParams& params, double upper)
    : season_(season), params_(params), upper_(upper) {
  if (season < 2) throw std::invalid_argument("season length must be >= 2");
  for (double p : {params.alpha, params.beta, params.gamma}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("smoothing parameters must lie in [0, 1]");
  }
}

void HoltWinters::update(double y) {
  const long t = observations_++;
  if (t < season_) {
    warmup_.push_back(y);
    if (t + 1 == season_) {
      level_ = std::accumulate(warmup_.begin(), warmup_.end(), 0.0) / season_;
      trend_ = 0.0;
      seasonal_.resize(season_);
      for (int i = 0; i < season_; ++i) seasonal_[i] = warmup_[i] - level_;
      warmup_.clear();
    }
    return;
  }
  const auto slot = static_cast<std::size_t>(t % season_);
  const double s_old = seasonal_[slot];
  const double level = params_.alpha * (y - s_old) + (1.0 - params_.alpha) * (level_ + trend_);
  trend_ = params_.beta * (level - level_) + (1.0 - params_.beta) * trend_;
  level_ = level;
  seasonal_[slot] = params_.gamma * (y - level_) + (1.0 - params_.gamma) * s_old;
}

std::vector<double> HoltWinters::predict_raw(int n) const {
  if (!ready()) {
    throw ForecastNotReady("Holt-Winters needs " + std::to_string(2 * season_) + " observations, has " +
                           std::to_string(observations_) + "; use a persistence forecast");
  }
  std::vector<double> out;
  for (int h = 1; h <= n; ++h) {
    const auto slot = static_cast<std::size_t>((observations_ + h - 1) % season_);
    out.push_back(level_ + h * trend_ + seasonal_[slot]);
  }
  return out;
}

std::vector<double> HoltWinters::predict(int n) const {
  auto out = predict_raw(n);
  for (double& v : out) v = std::clamp(v, 0.0, upper_);
  return out;
}

}  // namespace skygrid
