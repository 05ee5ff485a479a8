#include <doctest.h>

#include <cmath>

#include "breachlens/arima.hpp"
#include "breachlens/forecast.hpp"
#include "breachlens/prng.hpp"
#include "breachlens/trend.hpp"

using namespace breachlens;
using namespace breachlens::forecast;

namespace {

features::EngineeredIncident incident(int year, int risk) {
  features::EngineeredIncident e;
  e.base.year = year;
  e.base.incident_month = 1;
  e.risk_terms_score = risk;
  return e;
}

std::vector<double> simulate_ar1(double phi, double mu, std::size_t n, Rng& rng) {
  std::vector<double> out;
  double x = mu;
  for (std::size_t i = 0; i < n + 100; ++i) {
    x = mu + phi * (x - mu) + rng.gaussian();
    if (i >= 100) out.push_back(x);
  }
  return out;
}

std::vector<double> simulate_ma1(double theta, double mu, std::size_t n, Rng& rng) {
  std::vector<double> out;
  double prev_eps = rng.gaussian();
  for (std::size_t i = 0; i < n; ++i) {
    double eps = rng.gaussian();
    out.push_back(mu + eps + theta * prev_eps);
    prev_eps = eps;
  }
  return out;
}

}  // namespace

TEST_CASE("aggregate_annual means and forward fill") {
  std::vector<features::EngineeredIncident> v{incident(2020, 1), incident(2020, 3),
                                              incident(2021, 2)};
  auto s = aggregate_annual(v);
  CHECK(s.years == std::vector<int>{2020, 2021});
  CHECK(s.values[0] == doctest::Approx(2.0));
  CHECK(s.values[1] == doctest::Approx(2.0));
  CHECK(!s.filled[0]);

  std::vector<features::EngineeredIncident> gap{incident(2019, 4), incident(2021, 6)};
  auto sg = aggregate_annual(gap);
  CHECK(sg.years == std::vector<int>{2019, 2020, 2021});
  CHECK(sg.values[1] == doctest::Approx(4.0));  // forward filled
  CHECK(sg.filled[1]);
  CHECK(!sg.filled[0]);
  CHECK(!sg.filled[2]);

  auto single = aggregate_annual({incident(2015, 2)});
  CHECK(single.years.size() == 1);
  CHECK(single.filled[0] == false);

  std::vector<features::EngineeredIncident> invalid{incident(0, 1)};
  CHECK_THROWS_AS(aggregate_annual(invalid), std::domain_error);
}

TEST_CASE("kpss: white noise is not rejected, a random walk is") {
  Rng rng(101);
  std::vector<double> noise;
  for (int i = 0; i < 100; ++i) noise.push_back(rng.gaussian());
  auto k = kpss_stationarity(noise);
  CHECK(!k.reject_at_5pct);

  int rejections = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng walk_rng(1000 + static_cast<std::uint64_t>(seed));
    std::vector<double> walk;
    double x = 0;
    for (int i = 0; i < 200; ++i) {
      x += walk_rng.gaussian();
      walk.push_back(x);
    }
    rejections += kpss_stationarity(walk).reject_at_5pct;
  }
  CHECK(rejections >= 19);

  std::vector<double> constant(50, 3.0);
  auto kc = kpss_stationarity(constant);
  CHECK(kc.statistic == 0.0);
  CHECK(!kc.reject_at_5pct);

  CHECK_THROWS_AS(kpss_stationarity({1, 2, 3}), std::domain_error);
}

TEST_CASE("boxcox: lambda recovery and round trip") {
  Rng rng(7);
  // already-Gaussian data: the identity family, so lambda sits near 1
  std::vector<double> gaussian;
  for (int i = 0; i < 400; ++i) gaussian.push_back(6.0 + 1.5 * rng.gaussian());
  auto b1 = boxcox(gaussian);
  CHECK(std::fabs(b1.lambda - 1.0) <= 0.2000001);

  // exponential of Gaussian: lambda near 0, and the transform is ln there
  std::vector<double> lognormal;
  for (int i = 0; i < 300; ++i) lognormal.push_back(std::exp(rng.gaussian()));
  auto b0 = boxcox(lognormal);
  CHECK(std::fabs(b0.lambda) <= 0.100001);
  // the lambda = 0 branch is the natural log
  for (double v : {0.5, 1.0, 7.3}) {
    CHECK(boxcox_apply_one(v, 0.0) == doctest::Approx(std::log(v)).epsilon(1e-15));
  }
  if (b0.lambda == 0.0) {
    CHECK(b0.transformed[0] == doctest::Approx(std::log(lognormal[0])).epsilon(1e-12));
  }

  // inverse(transform(x)) = x
  for (double lambda : {-1.0, -0.3, 0.0, 0.5, 1.0, 2.0}) {
    for (double x : {0.25, 1.0, 3.7, 42.0}) {
      double z = boxcox_apply_one(x, lambda);
      CHECK(boxcox_invert_one(z, lambda, 0.0) == doctest::Approx(x).epsilon(1e-10));
    }
  }

  CHECK_THROWS_AS(boxcox({-1.0, 2.0}, false), std::domain_error);
  auto shifted = boxcox({-1.0, 2.0, 5.0}, true);
  CHECK(shifted.shift == doctest::Approx(2.0));  // 1 - min
}

TEST_CASE("forecast_metrics") {
  auto perfect = forecast_metrics({1, 2, 3}, {1, 2, 3});
  CHECK(perfect.mae == 0.0);
  CHECK(perfect.rmse == 0.0);
  CHECK(perfect.mape == 0.0);

  auto m = forecast_metrics({1, 2, 3}, {2, 2, 2});
  CHECK(m.mae == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.rmse == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  CHECK(m.mape == doctest::Approx(100.0 / 3.0 * (1.0 + 0.0 + 1.0 / 3.0)).epsilon(1e-12));
  CHECK(m.normalized_mae == doctest::Approx((2.0 / 3.0) / 2.0).epsilon(1e-12));

  // scale invariance
  auto scaled = forecast_metrics({3, 6, 9}, {6, 6, 6});
  CHECK(scaled.mape == doctest::Approx(m.mape).epsilon(1e-12));
  CHECK(scaled.normalized_mae == doctest::Approx(m.normalized_mae).epsilon(1e-12));

  auto skip = forecast_metrics({0, 2}, {1, 2});
  CHECK(skip.mape_skipped == 1);
  CHECK_THROWS_AS(forecast_metrics({0, 0}, {1, 1}), std::domain_error);
}

TEST_CASE("arima (0,0,0)+intercept closed form") {
  std::vector<double> y{1, 2, 3, 4, 5, 4, 3, 2, 1, 2};
  auto fit = fit_arima(y, ArimaOrder{0, 0, 0}, true);
  double mean = 2.7;
  CHECK(fit.intercept == doctest::Approx(mean).epsilon(1e-12));
  double ss = 0;
  for (double v : y) ss += (v - mean) * (v - mean);
  double sigma2 = ss / 10.0;
  CHECK(fit.sigma2 == doctest::Approx(sigma2).epsilon(1e-12));
  double expect_ll = -0.5 * 10.0 * (std::log(2.0 * M_PI * sigma2) + 1.0);
  CHECK(fit.loglik == doctest::Approx(expect_ll).epsilon(1e-12));
  CHECK(fit.aic == doctest::Approx(-2.0 * expect_ll + 2.0 * 2.0).epsilon(1e-12));

  // AIC of the intercept model is invariant to shifting the series
  std::vector<double> shifted = y;
  for (double& v : shifted) v += 100.0;
  auto fit2 = fit_arima(shifted, ArimaOrder{0, 0, 0}, true);
  CHECK(std::fabs(fit2.aic - fit.aic) < 1e-8);

  CHECK_THROWS_AS(fit_arima(std::vector<double>(20, 5.0), ArimaOrder{0, 0, 0}, true),
                  arima_error);
}

TEST_CASE("arima recovers a seeded AR(1)") {
  Rng rng(2001);
  auto y = simulate_ar1(0.8, 10.0, 200, rng);
  auto fit = fit_arima(y, ArimaOrder{1, 0, 0}, true);
  REQUIRE(fit.ar_coeffs.size() == 1);
  CHECK(fit.ar_coeffs[0] >= 0.65);
  CHECK(fit.ar_coeffs[0] <= 0.95);
  // nested-model property: AR(1) likelihood dominates the white-noise fit
  auto base = fit_arima(y, ArimaOrder{0, 0, 0}, true);
  CHECK(fit.loglik >= base.loglik - 1e-9);
}

TEST_CASE("exact likelihood matches the closed form for AR(1)") {
  // profile log-likelihood of a mean-centered AR(1):
  //   e1 = x1 * sqrt(1 - phi^2), et = xt - phi * x(t-1),
  //   ll = -n/2 (log 2*pi + log(SS/n) + 1) + log(1 - phi^2) / 2
  Rng rng(4004);
  std::vector<double> x;
  double v = 0;
  for (int i = 0; i < 120; ++i) {
    v = 0.7 * v + rng.gaussian();
    if (i >= 20) x.push_back(v);
  }
  double n = static_cast<double>(x.size());
  for (double phi : {-0.6, 0.0, 0.3, 0.7, 0.9}) {
    double ss = (1.0 - phi * phi) * x[0] * x[0];
    for (std::size_t t = 1; t < x.size(); ++t) {
      double e = x[t] - phi * x[t - 1];
      ss += e * e;
    }
    double sigma2 = ss / n;
    double closed = -0.5 * n * (std::log(2.0 * M_PI) + std::log(sigma2) + 1.0) +
                    0.5 * std::log(1.0 - phi * phi);
    auto got = arima_detail::exact_loglik(x, {phi}, {});
    REQUIRE(got.ok);
    CHECK(got.loglik == doctest::Approx(closed).epsilon(1e-12));
    CHECK(got.sigma2 == doctest::Approx(sigma2).epsilon(1e-12));
  }
}

TEST_CASE("arima fits keep AR and MA roots outside the unit circle") {
  Rng rng(2010);
  // strongly persistent AR(2)
  std::vector<double> y;
  double x1 = 0, x2 = 0;
  for (int i = 0; i < 350; ++i) {
    double x = 1.2 * x1 - 0.3 * x2 + rng.gaussian();
    if (i >= 50) y.push_back(x);
    x2 = x1;
    x1 = x;
  }
  auto fit = fit_arima(y, ArimaOrder{2, 0, 1}, true);
  std::vector<double> ar_poly;
  for (double phi : fit.ar_coeffs) ar_poly.push_back(-phi);
  for (const auto& root : arima_detail::poly_roots(ar_poly)) {
    CHECK(std::abs(root) > 1.0 - 1e-6);
  }
  for (const auto& root : arima_detail::poly_roots(fit.ma_coeffs)) {
    CHECK(std::abs(root) > 1.0 - 1e-6);
  }
}

TEST_CASE("arima recovers a seeded MA(1)") {
  Rng rng(2002);
  auto y = simulate_ma1(0.5, 0.0, 300, rng);
  auto fit = fit_arima(y, ArimaOrder{0, 0, 1}, false);
  REQUIRE(fit.ma_coeffs.size() == 1);
  CHECK(fit.ma_coeffs[0] >= 0.35);
  CHECK(fit.ma_coeffs[0] <= 0.65);
}

TEST_CASE("auto_arima on seeded white noise selects the intercept-only model") {
  Rng rng(1100);  // first seed of the frozen acceptance block
  std::vector<double> y;
  for (int i = 0; i < 100; ++i) y.push_back(5.0 + rng.gaussian());
  auto fit = auto_arima(y);
  CHECK(fit.order.p == 0);
  CHECK(fit.order.d == 0);
  CHECK(fit.order.q == 0);
  CHECK(fit.include_intercept);
  CHECK(fit.intercept == doctest::Approx(5.0).epsilon(0.1));
}

TEST_CASE("auto_arima on AR(2) data picks p >= 1 and beats white noise on AIC") {
  Rng rng(2003);
  std::vector<double> y;
  double x1 = 0, x2 = 0;
  for (int i = 0; i < 400; ++i) {
    double x = 0.6 * x1 - 0.3 * x2 + rng.gaussian();
    if (i >= 100) y.push_back(x);
    x2 = x1;
    x1 = x;
  }
  auto fit = auto_arima(y);
  CHECK(fit.order.p >= 1);
  auto wn = fit_arima(y, ArimaOrder{0, fit.order.d, 0}, true);
  CHECK(fit.aic <= wn.aic);
}

TEST_CASE("auto_arima difference selection via repeated kpss") {
  std::vector<double> trend;
  Rng rng(2004);
  for (int i = 0; i < 120; ++i) trend.push_back(0.5 * i + rng.gaussian() * 0.3);
  auto fit = auto_arima(trend);
  CHECK(fit.order.d >= 1);
}

TEST_CASE("forecast_arima: flat model reproduces the analytic form") {
  std::vector<double> y{0.1, 0.3, 0.2, 0.4, 0.1, 0.25, 0.15, 0.3, 0.2, 0.35};
  auto fit = fit_arima(y, ArimaOrder{0, 0, 0}, true);
  auto fc = forecast_arima(fit, 3, 0.95, 2023);
  double z = special::norm_ppf(0.975);
  for (int k = 0; k < 3; ++k) {
    CHECK(fc.point[static_cast<std::size_t>(k)] == fit.intercept);
    CHECK(fc.lower[static_cast<std::size_t>(k)] ==
          doctest::Approx(fit.intercept - z * std::sqrt(fit.sigma2)).epsilon(1e-12));
    CHECK(fc.upper[static_cast<std::size_t>(k)] ==
          doctest::Approx(fit.intercept + z * std::sqrt(fit.sigma2)).epsilon(1e-12));
  }
  CHECK(fc.horizon_labels[0] == "2024");
  CHECK(fc.horizon_labels[2] == "2026");
}

TEST_CASE("forecast_arima: AR(1) recursion and variance ladder") {
  Rng rng(2005);
  auto y = simulate_ar1(0.8, 5.0, 200, rng);
  auto fit = fit_arima(y, ArimaOrder{1, 0, 0}, true);
  auto fc = forecast_arima(fit, 10, 0.95, 0);
  double phi = fit.ar_coeffs[0];
  double one_step = fit.intercept + phi * (y.back() - fit.intercept);
  CHECK(fc.point[0] == doctest::Approx(one_step).epsilon(1e-9));
  // interval width non-decreasing in the horizon
  for (std::size_t k = 1; k < fc.point.size(); ++k) {
    double w_prev = fc.upper[k - 1] - fc.lower[k - 1];
    double w_cur = fc.upper[k] - fc.lower[k];
    CHECK(w_cur >= w_prev - 1e-12);
  }
  // convergence toward the unconditional mean
  double prev_gap = std::fabs(fc.point[0] - fit.intercept);
  for (std::size_t k = 1; k < fc.point.size(); ++k) {
    double gap = std::fabs(fc.point[k] - fit.intercept);
    CHECK(gap <= prev_gap + 1e-12);
    prev_gap = gap;
  }
  // bounds bracket the point forecast
  for (std::size_t k = 0; k < fc.point.size(); ++k) {
    CHECK(fc.lower[k] <= fc.point[k]);
    CHECK(fc.point[k] <= fc.upper[k]);
  }
}

TEST_CASE("trend: noiseless line is recovered at any penalty") {
  std::vector<double> t, y;
  for (int i = 0; i < 24; ++i) {
    t.push_back(2000.0 + i);
    y.push_back(2.0 * i + 1.0);
  }
  for (double penalty : {0.1, 1.0}) {
    auto model = fit_trend_model(t, y, -1, penalty);
    CHECK(model.base_slope == doctest::Approx(2.0).epsilon(1e-6));
    for (double d : model.slope_deltas) CHECK(std::fabs(d) < 1e-6);
    double rmse = model.residual_sd;
    CHECK(rmse < 1e-6);
  }
}

TEST_CASE("trend: one-kink series reconstructed as the penalty vanishes") {
  // place the kink exactly on one of the default changepoints
  std::vector<double> t;
  for (int i = 0; i < 23; ++i) t.push_back(static_cast<double>(i));
  double span = t.back() - t.front();
  int n_cp = static_cast<int>(std::min<std::size_t>(19, t.size() - 3));
  double kink = 0.8 * span * 10.0 / n_cp;  // s_10 of the default grid
  std::vector<double> y;
  for (double ti : t) y.push_back(1.0 + 0.5 * ti + 1.5 * std::max(0.0, ti - kink));
  auto model = fit_trend_model(t, y, -1, 1e-10);
  double sse = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double r = y[i] - model.trend_at(t[i]);
    sse += r * r;
  }
  double rmse = std::sqrt(sse / static_cast<double>(t.size()));
  CHECK(rmse < 1e-6);
  // objective trace is non-increasing
  for (std::size_t i = 1; i < model.objective_trace.size(); ++i) {
    CHECK(model.objective_trace[i] <= model.objective_trace[i - 1] + 1e-12);
  }
}

TEST_CASE("trend: constant series") {
  std::vector<double> t{0, 1, 2, 3, 4, 5}, y(6, 7.5);
  auto model = fit_trend_model(t, y, -1, 0.1);
  CHECK(std::fabs(model.base_slope) < 1e-8);
  for (double d : model.slope_deltas) CHECK(std::fabs(d) < 1e-8);
  CHECK(model.residual_sd < 1e-8);
}

TEST_CASE("trend: rejects short input") {
  CHECK_THROWS_AS(fit_trend_model({0, 1, 2}, {1, 2, 3}), std::domain_error);
}

TEST_CASE("forecast_trend: degenerate model collapses to the point") {
  std::vector<double> t, y;
  for (int i = 0; i < 10; ++i) {
    t.push_back(static_cast<double>(i));
    y.push_back(3.0 + 2.0 * i);
  }
  auto model = fit_trend_model(t, y, -1, 1.0);
  REQUIRE(model.residual_sd < 1e-9);
  auto fc = forecast_trend(model, 4, 0.8, 200, 99);
  for (std::size_t k = 0; k < fc.point.size(); ++k) {
    CHECK(fc.lower[k] == doctest::Approx(fc.point[k]).epsilon(1e-9));
    CHECK(fc.upper[k] == doctest::Approx(fc.point[k]).epsilon(1e-9));
  }
}

TEST_CASE("forecast_trend: brackets, level monotonicity, determinism") {
  Rng rng(55);
  std::vector<double> t, y;
  for (int i = 0; i < 30; ++i) {
    t.push_back(static_cast<double>(i));
    y.push_back(0.2 * i + (i > 18 ? 0.9 * (i - 18) : 0.0) + rng.gaussian() * 0.5);
  }
  auto model = fit_trend_model(t, y, -1, 0.05);
  auto fc80 = forecast_trend(model, 5, 0.80, 500, 7);
  auto fc95 = forecast_trend(model, 5, 0.95, 500, 7);
  for (std::size_t k = 0; k < fc80.point.size(); ++k) {
    CHECK(fc80.lower[k] <= fc80.point[k]);
    CHECK(fc80.point[k] <= fc80.upper[k]);
    double w80 = fc80.upper[k] - fc80.lower[k];
    double w95 = fc95.upper[k] - fc95.lower[k];
    CHECK(w95 >= w80 - 1e-12);
  }
  auto again = forecast_trend(model, 5, 0.80, 500, 7);
  for (std::size_t k = 0; k < fc80.point.size(); ++k) {
    CHECK(fc80.lower[k] == again.lower[k]);
    CHECK(fc80.upper[k] == again.upper[k]);
  }
}
