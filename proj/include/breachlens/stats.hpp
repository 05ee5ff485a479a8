#ifndef BREACHLENS_STATS_HPP
#define BREACHLENS_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "breachlens/core.hpp"
#include "breachlens/features.hpp"
#include "breachlens/special.hpp"

namespace breachlens::stats {

using nlohmann::json;

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::domain_error("mean: empty input");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Midpoint ranks for ties, 1-based. The workhorse for every rank test here.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
  std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

// Linear-interpolation quantile at rank q*(n-1) over the sorted values
// (numpy/pandas default). Q1/Q3 and therefore the outlier sets depend on
// this exact convention.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::domain_error("quantile: empty input");
  if (q < 0.0 || q > 1.0) throw std::domain_error("quantile: q outside [0,1]");
  std::sort(values.begin(), values.end());
  double rank = q * static_cast<double>(values.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  double frac = rank - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

struct OutlierReport {
  std::string column;
  double q1 = 0, q3 = 0, lower = 0, upper = 0;
  std::vector<std::size_t> outlier_indices;

  json to_json() const {
    json j;
    j["column"] = column;
    j["q1"] = q1;
    j["q3"] = q3;
    j["lower"] = lower;
    j["upper"] = upper;
    j["outlier_indices"] = outlier_indices;
    return j;
  }
};

inline OutlierReport iqr_outliers(const std::vector<double>& values,
                                  const std::string& column = "") {
  if (values.empty()) throw std::domain_error("iqr_outliers: empty input");
  OutlierReport rep;
  rep.column = column;
  rep.q1 = quantile(values, 0.25);
  rep.q3 = quantile(values, 0.75);
  double iqr = rep.q3 - rep.q1;
  rep.lower = rep.q1 - 1.5 * iqr;
  rep.upper = rep.q3 + 1.5 * iqr;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < rep.lower || values[i] > rep.upper) rep.outlier_indices.push_back(i);
  }
  return rep;
}

enum class TestMethod { anova, kruskal_wallis, mann_whitney };

inline const char* to_string(TestMethod m) {
  switch (m) {
    case TestMethod::anova: return "anova";
    case TestMethod::kruskal_wallis: return "kruskal_wallis";
    case TestMethod::mann_whitney: return "mann_whitney";
  }
  return "?";
}

struct TestResult {
  double statistic = 0;
  double p_value = 1;
  std::optional<double> df;   // single df (chi-square); unset where N/A
  std::optional<double> df2;  // denominator df for F
  double alpha = 0.05;
  bool significant = false;
  TestMethod method = TestMethod::anova;

  json to_json() const {
    json j;
    j["method"] = to_string(method);
    j["statistic"] = statistic;
    j["p_value"] = p_value;
    if (df) j["df"] = *df;
    if (df2) j["df2"] = *df2;
    j["alpha"] = alpha;
    j["significant"] = significant;
    return j;
  }
};

inline TestResult finish(TestResult t) {
  t.significant = t.p_value < t.alpha;
  return t;
}

inline TestResult anova_oneway(const std::vector<std::vector<double>>& groups,
                               double alpha = 0.05) {
  if (groups.size() < 2) throw std::domain_error("anova_oneway: need >= 2 groups");
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw std::domain_error("anova_oneway: empty group");
    n += g.size();
  }
  std::size_t k = groups.size();
  if (n <= k) throw std::domain_error("anova_oneway: need total n > number of groups");
  double grand = 0;
  for (const auto& g : groups) grand += std::accumulate(g.begin(), g.end(), 0.0);
  grand /= static_cast<double>(n);
  double ss_between = 0, ss_within = 0;
  for (const auto& g : groups) {
    double m = mean(g);
    ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double x : g) ss_within += (x - m) * (x - m);
  }
  double df1 = static_cast<double>(k - 1);
  double df2 = static_cast<double>(n - k);
  double ms_between = ss_between / df1;
  double ms_within = ss_within / df2;
  TestResult t;
  t.method = TestMethod::anova;
  t.alpha = alpha;
  t.df = df1;
  t.df2 = df2;
  if (ms_within == 0.0) {
    if (ms_between > 0.0) {
      t.statistic = std::numeric_limits<double>::infinity();
      t.p_value = 0.0;
    } else {
      t.statistic = 0.0;
      t.p_value = 1.0;
    }
    return finish(t);
  }
  t.statistic = ms_between / ms_within;
  t.p_value = special::f_sf(t.statistic, df1, df2);
  return finish(t);
}

namespace detail {

// Sum of (t^3 - t) over tie groups of the pooled sample.
inline double tie_term(const std::vector<double>& pooled_sorted) {
  double s = 0;
  std::size_t i = 0, n = pooled_sorted.size();
  while (i < n) {
    std::size_t j = i;
    while (j < n && pooled_sorted[j] == pooled_sorted[i]) ++j;
    double t = static_cast<double>(j - i);
    s += t * t * t - t;
    i = j;
  }
  return s;
}

}  // namespace detail

inline TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups,
                                 double alpha = 0.05) {
  if (groups.size() < 2) throw std::domain_error("kruskal_wallis: need >= 2 groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.empty()) throw std::domain_error("kruskal_wallis: empty group");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  double n = static_cast<double>(pooled.size());
  std::vector<double> ranks = average_ranks(pooled);
  double h = 0;
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double rank_sum = 0;
    for (std::size_t i = 0; i < g.size(); ++i) rank_sum += ranks[offset + i];
    h += rank_sum * rank_sum / static_cast<double>(g.size());
    offset += g.size();
  }
  h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double correction = 1.0 - detail::tie_term(sorted) / (n * n * n - n);
  TestResult t;
  t.method = TestMethod::kruskal_wallis;
  t.alpha = alpha;
  t.df = static_cast<double>(groups.size() - 1);
  if (correction <= 0.0) {
    // every pooled value identical
    t.statistic = 0.0;
    t.p_value = 1.0;
    return finish(t);
  }
  t.statistic = h / correction;
  t.p_value = special::chi2_sf(t.statistic, *t.df);
  return finish(t);
}

enum class MwMethod { automatic, exact, approximate };

struct MannWhitneyResult {
  TestResult test;       // statistic = U = n1*n2 + n1*(n1+1)/2 - R1
  double u1 = 0;         // same orientation as the statistic
  double u2 = 0;         // n1*n2 - u1
  double u_min = 0;
  bool exact = false;    // which p path produced test.p_value
};

namespace detail {

// Exact null distribution of R1 (rank sum of the first sample) over all
// C(N, n1) equally likely rank subsets, ties absent. Counts fit comfortably
// in double for the sizes the exact path accepts.
inline std::vector<double> rank_sum_counts(std::size_t n1, std::size_t n) {
  std::size_t max_sum = n * (n + 1) / 2;
  std::vector<std::vector<double>> dp(n1 + 1, std::vector<double>(max_sum + 1, 0.0));
  dp[0][0] = 1.0;
  for (std::size_t v = 1; v <= n; ++v) {
    for (std::size_t k = std::min(n1, v); k >= 1; --k) {
      for (std::size_t s = max_sum; s >= v; --s) {
        if (dp[k - 1][s - v] != 0.0) dp[k][s] += dp[k - 1][s - v];
      }
    }
  }
  return dp[n1];
}

}  // namespace detail

inline MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                        const std::vector<double>& b,
                                        double alpha = 0.05,
                                        MwMethod method = MwMethod::automatic) {
  if (a.empty() || b.empty()) throw std::domain_error("mann_whitney_u: empty sample");
  std::size_t n1 = a.size(), n2 = b.size();
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<double> ranks = average_ranks(pooled);
  double r1 = 0;
  for (std::size_t i = 0; i < n1; ++i) r1 += ranks[i];
  double u1 = static_cast<double>(n1) * static_cast<double>(n2) +
              static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0 - r1;
  double u2 = static_cast<double>(n1) * static_cast<double>(n2) - u1;

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double ties = detail::tie_term(sorted);
  bool has_ties = ties > 0.0;

  MwMethod chosen = method;
  if (chosen == MwMethod::automatic) {
    chosen = (!has_ties && n1 + n2 <= 12) ? MwMethod::exact : MwMethod::approximate;
  }
  if (chosen == MwMethod::exact && has_ties) {
    throw precondition_error("mann_whitney_u: exact p requires tie-free samples");
  }

  MannWhitneyResult res;
  res.u1 = u1;
  res.u2 = u2;
  res.u_min = std::min(u1, u2);
  res.test.method = TestMethod::mann_whitney;
  res.test.alpha = alpha;
  res.test.statistic = u1;

  double n = static_cast<double>(n1 + n2);
  if (chosen == MwMethod::exact) {
    auto counts = detail::rank_sum_counts(n1, n1 + n2);
    double total = 0, le = 0, ge = 0;
    // r1 is integral here (no ties); compare rank sums directly.
    for (std::size_t s = 0; s < counts.size(); ++s) {
      double c = counts[s];
      if (c == 0.0) continue;
      total += c;
      if (static_cast<double>(s) <= r1 + 1e-9) le += c;
      if (static_cast<double>(s) >= r1 - 1e-9) ge += c;
    }
    // U is decreasing in R1: P(U >= u) = P(R1 <= r1).
    double p = 2.0 * std::min(le, ge) / total;
    res.test.p_value = std::min(1.0, p);
    res.exact = true;
  } else {
    double mu = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
    double var = (static_cast<double>(n1) * static_cast<double>(n2) / 12.0) *
                 ((n + 1.0) - ties / (n * (n - 1.0)));
    if (var <= 0.0) {
      res.test.p_value = 1.0;
    } else {
      double diff = u1 - mu;
      double cc = diff > 0 ? 0.5 : (diff < 0 ? -0.5 : 0.0);
      double z = (diff - cc) / std::sqrt(var);
      res.test.p_value = std::min(1.0, 2.0 * special::norm_sf(std::fabs(z)));
    }
    res.exact = false;
  }
  res.test = finish(res.test);
  return res;
}

inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::domain_error("pearson_r: need equal lengths >= 2");
  double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::domain_error("pearson_r: undefined for zero-variance input");
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

struct CorrelationMatrix {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> r;     // symmetric, unit diagonal
  std::vector<std::string> excluded;      // constant columns left out

  json to_json() const {
    json j;
    j["columns"] = columns;
    j["r"] = r;
    j["excluded"] = excluded;
    return j;
  }
};

inline CorrelationMatrix correlation_matrix(
    const std::vector<std::vector<double>>& cols, const std::vector<std::string>& names) {
  if (cols.size() != names.size())
    throw std::domain_error("correlation_matrix: names/columns mismatch");
  CorrelationMatrix out;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    bool constant = true;
    for (double v : cols[i]) {
      if (v != cols[i].front()) { constant = false; break; }
    }
    if (constant || cols[i].size() < 2) {
      out.excluded.push_back(names[i]);
    } else {
      keep.push_back(i);
      out.columns.push_back(names[i]);
    }
  }
  std::size_t k = keep.size();
  out.r.assign(k, std::vector<double>(k, 1.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      double rij = pearson_r(cols[keep[i]], cols[keep[j]]);
      out.r[i][j] = rij;
      out.r[j][i] = rij;
    }
  }
  return out;
}

// Month histogram; -1 stays its own bucket, never merged into January.
inline std::map<int, std::size_t> monthly_counts(
    const std::vector<features::EngineeredIncident>& incidents) {
  std::map<int, std::size_t> counts;
  counts[-1] = 0;
  for (int m = 1; m <= 12; ++m) counts[m] = 0;
  for (const auto& e : incidents) ++counts[e.base.incident_month];
  return counts;
}

struct HolidayComparison {
  double mean_holiday = 0;
  double mean_non_holiday = 0;
  MannWhitneyResult test;

  json to_json() const {
    json j;
    j["mean_holiday"] = mean_holiday;
    j["mean_non_holiday"] = mean_non_holiday;
    j["test"] = test.test.to_json();
    j["test"]["u_min"] = test.u_min;
    j["test"]["exact"] = test.exact;
    return j;
  }
};

inline HolidayComparison holiday_comparison(
    const std::vector<features::EngineeredIncident>& incidents, double alpha = 0.05) {
  std::vector<double> holiday, non_holiday;
  for (const auto& e : incidents) {
    if (e.base.incident_month == -1) continue;
    (e.is_holiday_month ? holiday : non_holiday)
        .push_back(static_cast<double>(e.threat_enrichment_score));
  }
  if (holiday.empty())
    throw std::domain_error("holiday_comparison: holiday group is empty");
  if (non_holiday.empty())
    throw std::domain_error("holiday_comparison: non-holiday group is empty");
  HolidayComparison out;
  out.mean_holiday = mean(holiday);
  out.mean_non_holiday = mean(non_holiday);
  out.test = mann_whitney_u(holiday, non_holiday, alpha);
  return out;
}

struct CategoryShare {
  std::size_t count = 0;
  double percent = 0;
};

// Share table for a categorical field. "asset_category" maps onto the
// victim_sector column, the closest structured stand-in this schema has for
// a targeted-asset breakdown.
inline std::map<std::string, CategoryShare> categorical_distribution(
    const std::vector<features::EngineeredIncident>& incidents, const std::string& field) {
  std::map<std::string, std::size_t> counts;
  for (const auto& e : incidents) {
    std::string key;
    if (field == "action_type") key = to_string(e.action_type);
    else if (field == "actor_external") key = e.base.actor_external;
    else if (field == "asset_category" || field == "victim_sector") key = e.base.victim_sector;
    else if (field == "season") key = to_string(e.season);
    else if (field == "action") key = e.base.action;
    else if (field == "country") key = e.base.country;
    else if (field == "region_group") key = e.base.region_group;
    else throw std::domain_error("categorical_distribution: unsupported field " + field);
    ++counts[key];
  }
  std::map<std::string, CategoryShare> out;
  double total = 0;
  for (const auto& [k, c] : counts) total += static_cast<double>(c);
  for (const auto& [k, c] : counts) {
    out[k] = CategoryShare{c, 100.0 * static_cast<double>(c) / total};
  }
  return out;
}

}  // namespace breachlens::stats

#endif  // BREACHLENS_STATS_HPP
