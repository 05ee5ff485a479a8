#ifndef BREACHLENS_FORECAST_HPP
#define BREACHLENS_FORECAST_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "breachlens/core.hpp"
#include "breachlens/csv.hpp"
#include "breachlens/features.hpp"

namespace breachlens::forecast {

using nlohmann::json;

// Annual mean risk score with interior gaps forward-filled.
struct AnnualSeries {
  std::vector<int> years;      // contiguous after gap filling
  std::vector<double> values;  // mean risk_terms_score per year
  std::vector<bool> filled;    // true where the value was forward-filled

  json to_json() const {
    json j;
    j["years"] = years;
    j["values"] = values;
    j["filled"] = std::vector<int>(filled.begin(), filled.end());
    return j;
  }
};

inline AnnualSeries aggregate_annual(const std::vector<features::EngineeredIncident>& incidents) {
  std::map<int, std::pair<double, std::size_t>> by_year;  // sum, count
  for (const auto& e : incidents) {
    if (e.base.year <= 0) continue;
    auto& acc = by_year[e.base.year];
    acc.first += static_cast<double>(e.risk_terms_score);
    acc.second += 1;
  }
  if (by_year.empty())
    throw std::domain_error("aggregate_annual: no incidents with a valid year");
  AnnualSeries s;
  int first = by_year.begin()->first;
  int last = by_year.rbegin()->first;
  double prev = 0;
  for (int year = first; year <= last; ++year) {
    auto it = by_year.find(year);
    if (it != by_year.end()) {
      double m = it->second.first / static_cast<double>(it->second.second);
      s.years.push_back(year);
      s.values.push_back(m);
      s.filled.push_back(false);
      prev = m;
    } else {
      s.years.push_back(year);
      s.values.push_back(prev);  // forward fill
      s.filled.push_back(true);
    }
  }
  return s;
}

struct KpssResult {
  double statistic = 0;
  bool reject_at_5pct = false;
  int lag = 0;
};

// Level-stationarity statistic with a Bartlett-window long-run variance,
// lag = floor(4 * (n/100)^(1/4)). The 5% critical value for the level case
// is 0.463.
inline KpssResult kpss_stationarity(const std::vector<double>& series) {
  std::size_t n = series.size();
  if (n < 8) throw std::domain_error("kpss_stationarity: need at least 8 observations");
  double mean = 0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) resid[i] = series[i] - mean;

  double cumsum = 0, s2_num = 0;
  for (double r : resid) {
    cumsum += r;
    s2_num += cumsum * cumsum;
  }

  int lag = static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
  double lrv = 0;
  for (double r : resid) lrv += r * r;
  for (int s = 1; s <= lag; ++s) {
    double gamma = 0;
    for (std::size_t t = static_cast<std::size_t>(s); t < n; ++t) {
      gamma += resid[t] * resid[t - static_cast<std::size_t>(s)];
    }
    double w = 1.0 - static_cast<double>(s) / (static_cast<double>(lag) + 1.0);
    lrv += 2.0 * w * gamma;
  }
  lrv /= static_cast<double>(n);

  KpssResult out;
  out.lag = lag;
  if (lrv <= 0.0) {
    out.statistic = 0.0;  // constant series: treated as stationary
  } else {
    out.statistic = s2_num / (static_cast<double>(n) * static_cast<double>(n) * lrv);
  }
  out.reject_at_5pct = out.statistic > 0.463;
  return out;
}

struct BoxCoxResult {
  std::vector<double> transformed;
  double lambda = 1.0;
  double shift = 0.0;  // added to the series before transforming
};

inline double boxcox_apply_one(double y, double lambda) {
  if (lambda == 0.0) return std::log(y);
  return (std::pow(y, lambda) - 1.0) / lambda;
}

inline double boxcox_invert_one(double z, double lambda, double shift) {
  double y = lambda == 0.0 ? std::exp(z) : std::pow(lambda * z + 1.0, 1.0 / lambda);
  return y - shift;
}

// Lambda picked from the grid -1.0, -0.9, ..., 2.0 by maximizing the
// profile log-likelihood.
inline BoxCoxResult boxcox(const std::vector<double>& series, bool shift_to_positive = false) {
  if (series.empty()) throw std::domain_error("boxcox: empty series");
  BoxCoxResult out;
  double mn = *std::min_element(series.begin(), series.end());
  if (mn <= 0.0) {
    if (!shift_to_positive)
      throw std::domain_error("boxcox: series has non-positive values; enable the shift");
    out.shift = 1.0 - mn;
  }
  std::vector<double> y(series);
  for (double& v : y) v += out.shift;
  double n = static_cast<double>(y.size());
  double log_sum = 0;
  for (double v : y) log_sum += std::log(v);

  double best_ll = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 30; ++i) {
    double lambda = (static_cast<double>(i) - 10.0) / 10.0;
    std::vector<double> z;
    z.reserve(y.size());
    for (double v : y) z.push_back(boxcox_apply_one(v, lambda));
    double m = 0;
    for (double v : z) m += v;
    m /= n;
    double var = 0;
    for (double v : z) var += (v - m) * (v - m);
    var /= n;
    if (var <= 0.0) continue;
    double ll = -0.5 * n * std::log(var) + (lambda - 1.0) * log_sum;
    if (ll > best_ll) {
      best_ll = ll;
      out.lambda = lambda;
      out.transformed = std::move(z);
    }
  }
  return out;
}

struct ForecastMetrics {
  double mae = 0;
  double rmse = 0;
  double mape = 0;            // percent, zero actuals skipped
  double normalized_mae = 0;  // mae / mean(|actual|) over non-skipped terms
  std::size_t mape_skipped = 0;

  json to_json() const {
    json j;
    j["mae"] = mae;
    j["rmse"] = rmse;
    j["mape"] = mape;
    j["normalized_mae"] = normalized_mae;
    j["mape_skipped"] = mape_skipped;
    return j;
  }
};

inline ForecastMetrics forecast_metrics(const std::vector<double>& actual,
                                        const std::vector<double>& predicted) {
  if (actual.empty() || actual.size() != predicted.size())
    throw std::domain_error("forecast_metrics: need equal non-empty inputs");
  ForecastMetrics m;
  double n = static_cast<double>(actual.size());
  double ape_sum = 0, abs_actual_sum = 0;
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    double err = actual[i] - predicted[i];
    m.mae += std::fabs(err);
    m.rmse += err * err;
    if (actual[i] != 0.0) {
      ape_sum += std::fabs(err / actual[i]);
      abs_actual_sum += std::fabs(actual[i]);
      ++nonzero;
    } else {
      ++m.mape_skipped;
    }
  }
  m.mae /= n;
  m.rmse = std::sqrt(m.rmse / n);
  if (nonzero == 0)
    throw std::domain_error("forecast_metrics: MAPE undefined, all actuals are zero");
  m.mape = 100.0 * ape_sum / static_cast<double>(nonzero);
  m.normalized_mae = m.mae / (abs_actual_sum / static_cast<double>(nonzero));
  return m;
}

struct ForecastResult {
  std::vector<std::string> horizon_labels;
  std::vector<double> point;
  std::vector<double> lower;
  std::vector<double> upper;
  double level = 0.95;
  std::string model_tag;

  json to_json() const {
    json j;
    j["horizon_labels"] = horizon_labels;
    j["point"] = point;
    j["lower"] = lower;
    j["upper"] = upper;
    j["level"] = level;
    j["model_tag"] = model_tag;
    return j;
  }

  // CSV layout: label, point, lower, upper
  std::string to_csv() const {
    std::string out = csv::write_row({"label", "point", "lower", "upper"});
    for (std::size_t i = 0; i < point.size(); ++i) {
      out += csv::write_row({horizon_labels[i], numfmt::format_double(point[i]),
                             numfmt::format_double(lower[i]),
                             numfmt::format_double(upper[i])});
    }
    return out;
  }
};

}  // namespace breachlens::forecast

#endif  // BREACHLENS_FORECAST_HPP
