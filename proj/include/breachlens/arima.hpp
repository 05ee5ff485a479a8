#ifndef BREACHLENS_ARIMA_HPP
#define BREACHLENS_ARIMA_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "breachlens/core.hpp"
#include "breachlens/forecast.hpp"
#include "breachlens/optim.hpp"
#include "breachlens/special.hpp"

// ARIMA(p,d,q) with exact Gaussian likelihood. The likelihood comes from the
// innovations form of the Kalman recursion on the Harvey state space, with
// sigma^2 profiled out analytically; conditional-sum-of-squares estimates
// seed the exact-likelihood refinement (Nelder-Mead over transformed
// parameters). Stationarity/invertibility hold by construction: the
// optimizer works on unconstrained values mapped through tanh to partial
// autocorrelations and through the Levinson recursion to coefficients.

namespace breachlens::forecast {

using nlohmann::json;

struct ArimaOrder {
  int p = 0;
  int d = 0;
  int q = 0;
};

class arima_error : public std::runtime_error {
 public:
  arima_error(std::string msg, json diagnostics = {})
      : std::runtime_error(std::move(msg)), diagnostics_(std::move(diagnostics)) {}
  const json& diagnostics() const { return diagnostics_; }

 private:
  json diagnostics_;
};

struct ArimaFit {
  ArimaOrder order;
  bool include_intercept = true;
  std::vector<double> ar_coeffs;
  std::vector<double> ma_coeffs;
  double intercept = 0;  // mean of the d-times differenced series
  double sigma2 = 0;
  double loglik = 0;
  double aic = 0;
  double aicc = 0;
  int n_obs = 0;  // observations after differencing
  std::vector<double> residuals;       // CSS-style innovations of w - mu
  std::vector<double> integrate_tail;  // last values at each differencing level
  std::vector<double> w;               // differenced series used for the fit

  int n_params() const {
    return order.p + order.q + (include_intercept ? 1 : 0) + 1;  // + sigma^2
  }

  json to_json() const {
    json j;
    j["order"] = json{{"p", order.p}, {"d", order.d}, {"q", order.q}};
    j["include_intercept"] = include_intercept;
    j["ar_coeffs"] = ar_coeffs;
    j["ma_coeffs"] = ma_coeffs;
    j["intercept"] = intercept;
    j["sigma2"] = sigma2;
    j["loglik"] = loglik;
    j["aic"] = aic;
    j["aicc"] = aicc;
    j["n_obs"] = n_obs;
    return j;
  }
};

namespace arima_detail {

inline std::vector<double> difference(const std::vector<double>& y, int d) {
  std::vector<double> w = y;
  for (int k = 0; k < d; ++k) {
    std::vector<double> next;
    next.reserve(w.size() - 1);
    for (std::size_t i = 1; i < w.size(); ++i) next.push_back(w[i] - w[i - 1]);
    w = std::move(next);
  }
  return w;
}

// Levinson step: partial autocorrelations in (-1,1) to AR coefficients of a
// stationary polynomial 1 - a1 z - ... - ak z^k.
inline std::vector<double> pacf_to_ar(const std::vector<double>& pacf) {
  std::vector<double> a(pacf.size(), 0.0);
  std::vector<double> prev(pacf.size(), 0.0);
  for (std::size_t k = 0; k < pacf.size(); ++k) {
    a[k] = pacf[k];
    for (std::size_t i = 0; i < k; ++i) a[i] = prev[i] - pacf[k] * prev[k - 1 - i];
    prev = a;
  }
  return a;
}

inline std::vector<double> unconstrained_to_ar(const std::vector<double>& x) {
  std::vector<double> pacf(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) pacf[i] = std::tanh(x[i]);
  return pacf_to_ar(pacf);
}

// theta(B) = 1 + t1 B + ... invertible iff 1 - (-t1) z - ... is stationary.
inline std::vector<double> unconstrained_to_ma(const std::vector<double>& x) {
  std::vector<double> a = unconstrained_to_ar(x);
  for (double& v : a) v = -v;
  return a;
}

// Small dense solve (Gaussian elimination with partial pivoting).
inline bool solve_linear(std::vector<std::vector<double>> m, std::vector<double>& b) {
  std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    }
    if (std::fabs(m[piv][col]) < 1e-300) return false;
    std::swap(m[piv], m[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    for (std::size_t c = col + 1; c < n; ++c) b[col] -= m[col][c] * b[c];
    b[col] /= m[col][col];
  }
  return true;
}

// Exact log-likelihood of the demeaned series under ARMA(p,q) with unit
// innovation variance profile: the Kalman innovations recursion on the
// Harvey state space, stationary initial covariance from the Lyapunov
// equation. Returns profile loglik and the profiled sigma^2.
struct LoglikResult {
  double loglik = -std::numeric_limits<double>::infinity();
  double sigma2 = 0;
  bool ok = false;
};

inline LoglikResult exact_loglik(const std::vector<double>& w_centered,
                                 const std::vector<double>& phi,
                                 const std::vector<double>& theta) {
  std::size_t n = w_centered.size();
  std::size_t p = phi.size(), q = theta.size();
  std::size_t r = std::max(p, q + 1);
  LoglikResult out;

  // T: companion with phi in the first column, superdiagonal ones.
  std::vector<std::vector<double>> T(r, std::vector<double>(r, 0.0));
  for (std::size_t i = 0; i < r; ++i) {
    if (i < p) T[i][0] = phi[i];
    if (i + 1 < r) T[i][i + 1] = 1.0;
  }
  std::vector<double> R(r, 0.0);
  R[0] = 1.0;
  for (std::size_t j = 0; j < q; ++j) R[j + 1] = theta[j];

  // P0 solves P = T P T' + R R' (vec trick on an r^2 x r^2 system).
  std::size_t rr = r * r;
  std::vector<std::vector<double>> m(rr, std::vector<double>(rr, 0.0));
  std::vector<double> rhs(rr, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      std::size_t row = i * r + j;
      m[row][row] += 1.0;
      for (std::size_t k = 0; k < r; ++k) {
        for (std::size_t l = 0; l < r; ++l) {
          m[row][k * r + l] -= T[i][k] * T[j][l];
        }
      }
      rhs[row] = R[i] * R[j];
    }
  }
  if (!solve_linear(std::move(m), rhs)) return out;
  std::vector<std::vector<double>> P(r, std::vector<double>(r));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) P[i][j] = rhs[i * r + j];
  }

  std::vector<double> a(r, 0.0);  // state mean
  double sum_log_f = 0, sum_v2_f = 0;
  std::vector<double> ta(r), tpz(r);
  std::vector<std::vector<double>> tp(r, std::vector<double>(r));
  for (std::size_t t = 0; t < n; ++t) {
    double v = w_centered[t] - a[0];
    double f = P[0][0];
    if (!(f > 0.0) || !std::isfinite(f)) return out;
    sum_log_f += std::log(f);
    sum_v2_f += v * v / f;

    // a <- T a + (T P Z' / f) v ; P <- T P T' + R R' - (TPZ')(TPZ')^T / f
    for (std::size_t i = 0; i < r; ++i) {
      double acc = 0;
      for (std::size_t k = 0; k < r; ++k) acc += T[i][k] * a[k];
      ta[i] = acc;
      double accz = 0;
      for (std::size_t k = 0; k < r; ++k) accz += T[i][k] * P[k][0];
      tpz[i] = accz;
    }
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < r; ++j) {
        double acc = 0;
        for (std::size_t k = 0; k < r; ++k) acc += T[i][k] * P[k][j];
        tp[i][j] = acc;
      }
    }
    for (std::size_t i = 0; i < r; ++i) {
      a[i] = ta[i] + tpz[i] / f * v;
      for (std::size_t j = 0; j < r; ++j) {
        double acc = 0;
        for (std::size_t k = 0; k < r; ++k) acc += tp[i][k] * T[j][k];
        P[i][j] = acc + R[i] * R[j] - tpz[i] * tpz[j] / f;
      }
    }
  }
  double dn = static_cast<double>(n);
  double sigma2 = sum_v2_f / dn;
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) return out;
  out.loglik = -0.5 * dn * std::log(2.0 * M_PI) - 0.5 * sum_log_f -
               0.5 * dn * std::log(sigma2) - 0.5 * dn;
  out.sigma2 = sigma2;
  out.ok = std::isfinite(out.loglik);
  return out;
}

// Conditional sum of squares with zero pre-sample values; the classic cheap
// objective used to seed the exact fit.
inline double css_sigma2(const std::vector<double>& w_centered,
                         const std::vector<double>& phi,
                         const std::vector<double>& theta,
                         std::vector<double>* out_resid = nullptr) {
  std::size_t n = w_centered.size();
  std::vector<double> eps(n, 0.0);
  double ss = 0;
  for (std::size_t t = 0; t < n; ++t) {
    double pred = 0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      if (t > i) pred += phi[i] * w_centered[t - i - 1];
    }
    for (std::size_t j = 0; j < theta.size(); ++j) {
      if (t > j) pred += theta[j] * eps[t - j - 1];
    }
    eps[t] = w_centered[t] - pred;
    ss += eps[t] * eps[t];
  }
  if (out_resid) *out_resid = eps;
  return ss / static_cast<double>(n);
}

// Roots of 1 + c1 z + ... + ck z^k by Durand-Kerner iteration; deterministic
// start, plenty of iterations for the tiny degrees used here.
inline std::vector<std::complex<double>> poly_roots(const std::vector<double>& coeffs) {
  std::size_t deg = coeffs.size();
  while (deg > 0 && coeffs[deg - 1] == 0.0) --deg;
  if (deg == 0) return {};
  std::vector<std::complex<double>> monic(deg + 1);  // z^deg + ... ordering below
  // p(z) = 1 + c1 z + ... + cdeg z^deg; divide by cdeg for the monic form
  std::vector<std::complex<double>> a(deg + 1);
  for (std::size_t i = 0; i <= deg; ++i) {
    double ci = i == 0 ? 1.0 : coeffs[i - 1];
    a[i] = std::complex<double>(ci / coeffs[deg - 1], 0.0);
  }
  std::vector<std::complex<double>> z(deg);
  std::complex<double> seed(0.4, 0.9);
  std::complex<double> acc(1.0, 0.0);
  for (std::size_t i = 0; i < deg; ++i) {
    acc *= seed;
    z[i] = acc;
  }
  auto eval = [&](std::complex<double> x) {
    std::complex<double> r = a[deg];
    for (std::size_t i = deg; i-- > 0;) r = r * x + a[i];
    return r;
  };
  for (int it = 0; it < 200; ++it) {
    double moved = 0;
    for (std::size_t i = 0; i < deg; ++i) {
      std::complex<double> denom(1.0, 0.0);
      for (std::size_t j = 0; j < deg; ++j) {
        if (j != i) denom *= z[i] - z[j];
      }
      if (std::abs(denom) < 1e-30) continue;
      std::complex<double> delta = eval(z[i]) / denom;
      z[i] -= delta;
      moved = std::max(moved, std::abs(delta));
    }
    if (moved < 1e-12) break;
  }
  return z;
}

// Candidate screening used by the stepwise search: fits whose AR or MA roots
// hug the unit circle, or whose AR and MA roots nearly cancel, gain
// likelihood spuriously on noise-like data and are discarded the way
// reference auto-ARIMA implementations do.
inline bool admissible_roots(const std::vector<double>& phi, const std::vector<double>& theta) {
  std::vector<double> ar_poly(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) ar_poly[i] = -phi[i];  // 1 - phi1 z - ...
  std::vector<double> ma_poly = theta;                                // 1 + th1 z + ...
  auto ar_roots = poly_roots(ar_poly);
  auto ma_roots = poly_roots(ma_poly);
  for (const auto& r : ar_roots) {
    if (std::abs(r) < 1.01) return false;
  }
  for (const auto& r : ma_roots) {
    if (std::abs(r) < 1.01) return false;
  }
  for (const auto& ra : ar_roots) {
    for (const auto& rm : ma_roots) {
      if (std::abs(ra - rm) < 0.05) return false;
    }
  }
  return true;
}

struct ParamPack {
  std::vector<double> phi;
  std::vector<double> theta;
  double mu = 0;
};

inline ParamPack unpack(const std::vector<double>& x, int p, int q, bool intercept) {
  ParamPack pk;
  pk.phi = unconstrained_to_ar(std::vector<double>(x.begin(), x.begin() + p));
  pk.theta = unconstrained_to_ma(std::vector<double>(x.begin() + p, x.begin() + p + q));
  pk.mu = intercept ? x[static_cast<std::size_t>(p + q)] : 0.0;
  return pk;
}

}  // namespace arima_detail

inline ArimaFit fit_arima(const std::vector<double>& series, ArimaOrder order,
                          bool include_intercept) {
  using namespace arima_detail;
  if (order.p < 0 || order.d < 0 || order.q < 0)
    throw std::domain_error("fit_arima: negative order");
  int n = static_cast<int>(series.size());
  int n_w = n - order.d;
  int k_coef = order.p + order.q + (include_intercept ? 1 : 0);
  if (n_w <= k_coef + 1)
    throw precondition_error("fit_arima: series too short for the requested order");

  ArimaFit fit;
  fit.order = order;
  fit.include_intercept = include_intercept;
  fit.n_obs = n_w;
  fit.w = difference(series, order.d);
  {
    std::vector<double> tail;
    std::vector<double> level = series;
    for (int kd = 0; kd < order.d; ++kd) {
      tail.push_back(level.back());
      level = difference(level, 1);
    }
    fit.integrate_tail = tail;  // last value at each level, outermost first
  }

  const std::vector<double>& w = fit.w;
  double w_mean = 0;
  for (double v : w) w_mean += v;
  w_mean /= static_cast<double>(w.size());

  if (order.p == 0 && order.q == 0) {
    fit.intercept = include_intercept ? w_mean : 0.0;
    double ss = 0;
    for (double v : w) ss += (v - fit.intercept) * (v - fit.intercept);
    fit.sigma2 = ss / static_cast<double>(w.size());
    if (fit.sigma2 <= 0.0) {
      throw arima_error("fit_arima: degenerate fit, zero residual variance",
                        json{{"order", "(0,d,0)"}});
    }
    double dn = static_cast<double>(w.size());
    fit.loglik = -0.5 * dn * (std::log(2.0 * M_PI * fit.sigma2) + 1.0);
    fit.residuals.assign(w.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) fit.residuals[i] = w[i] - fit.intercept;
  } else {
    auto objective = [&](const std::vector<double>& x, bool exact) {
      ParamPack pk = unpack(x, order.p, order.q, include_intercept);
      std::vector<double> centered(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) centered[i] = w[i] - pk.mu;
      if (exact) {
        LoglikResult ll = exact_loglik(centered, pk.phi, pk.theta);
        return ll.ok ? -ll.loglik : std::numeric_limits<double>::infinity();
      }
      double s2 = css_sigma2(centered, pk.phi, pk.theta);
      if (!(s2 > 0.0) || !std::isfinite(s2)) return std::numeric_limits<double>::infinity();
      return std::log(s2);
    };

    std::vector<double> x0(static_cast<std::size_t>(k_coef), 0.0);
    if (include_intercept) x0.back() = w_mean;

    auto css_stage = optim::nelder_mead(
        [&](const std::vector<double>& x) { return objective(x, false); }, x0);
    double exact_at_css = objective(css_stage.x, true);
    auto ml_stage = optim::nelder_mead(
        [&](const std::vector<double>& x) { return objective(x, true); }, css_stage.x);

    std::vector<double> best_x = ml_stage.fx <= exact_at_css ? ml_stage.x : css_stage.x;
    double best_obj = std::min(ml_stage.fx, exact_at_css);
    if (!std::isfinite(best_obj)) {
      throw arima_error("fit_arima: optimizer failed to find a finite likelihood",
                        json{{"p", order.p},
                             {"q", order.q},
                             {"css_converged", css_stage.converged},
                             {"ml_converged", ml_stage.converged},
                             {"ml_iterations", ml_stage.iterations}});
    }

    ParamPack pk = unpack(best_x, order.p, order.q, include_intercept);
    fit.ar_coeffs = pk.phi;
    fit.ma_coeffs = pk.theta;
    fit.intercept = pk.mu;
    std::vector<double> centered(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) centered[i] = w[i] - pk.mu;
    LoglikResult ll = exact_loglik(centered, pk.phi, pk.theta);
    fit.loglik = ll.loglik;
    fit.sigma2 = ll.sigma2;
    css_sigma2(centered, pk.phi, pk.theta, &fit.residuals);
  }

  double k = static_cast<double>(fit.n_params());
  fit.aic = -2.0 * fit.loglik + 2.0 * k;
  double denom = static_cast<double>(fit.n_obs) - k - 1.0;
  fit.aicc = denom > 0 ? fit.aic + 2.0 * k * (k + 1.0) / denom
                       : std::numeric_limits<double>::infinity();
  return fit;
}

struct AutoArimaOptions {
  int max_p = 3;
  int max_q = 3;
  int max_d = 2;
  bool use_aicc = false;  // plain AIC is the default selection criterion
};

inline ArimaFit auto_arima(const std::vector<double>& series,
                           const AutoArimaOptions& opt = {}) {
  using namespace arima_detail;
  int d = 0;
  {
    std::vector<double> w = series;
    while (d < opt.max_d) {
      if (w.size() < 8) break;
      KpssResult k = kpss_stationarity(w);
      if (!k.reject_at_5pct) break;
      w = difference(w, 1);
      ++d;
    }
  }

  struct Key {
    int p, q;
    bool c;
    bool operator<(const Key& o) const {
      return std::tie(p, q, c) < std::tie(o.p, o.q, o.c);
    }
  };
  std::map<Key, double> cache;  // criterion value; +inf marks a failed fit
  std::map<Key, ArimaFit> fits;
  json failures = json::array();

  auto criterion = [&](const ArimaFit& f) { return opt.use_aicc ? f.aicc : f.aic; };
  auto evaluate = [&](int p, int q, bool c) {
    Key key{p, q, c};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    double value = std::numeric_limits<double>::infinity();
    try {
      ArimaFit f = fit_arima(series, ArimaOrder{p, d, q}, c);
      if (admissible_roots(f.ar_coeffs, f.ma_coeffs)) {
        value = criterion(f);
        fits.emplace(key, std::move(f));
      } else {
        failures.push_back(json{{"p", p}, {"d", d}, {"q", q}, {"intercept", c},
                                {"error", "inadmissible roots"}});
      }
    } catch (const std::exception& e) {
      failures.push_back(json{{"p", p}, {"d", d}, {"q", q}, {"intercept", c},
                              {"error", e.what()}});
    }
    cache[key] = value;
    return value;
  };

  // deterministic starting grid
  struct Start { int p, q; };
  const Start starts[] = {{2, 2}, {0, 0}, {1, 0}, {0, 1}};
  Key current{0, 0, true};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    if (s.p > opt.max_p || s.q > opt.max_q) continue;
    double v = evaluate(s.p, s.q, true);
    if (v < best - 1e-6) {
      best = v;
      current = Key{s.p, s.q, true};
    }
  }
  if (!std::isfinite(best)) {
    throw arima_error("auto_arima: every candidate model failed",
                      json{{"failures", failures}});
  }

  // stepwise moves: p first, then q, then combined steps, then the
  // intercept toggle; the combined moves let the search descend from the
  // (2,d,2) start without passing through a worse intermediate
  bool improved = true;
  while (improved) {
    improved = false;
    struct Move { int dp, dq; bool flip; };
    const Move moves[] = {{1, 0, false},  {-1, 0, false}, {0, 1, false},
                          {0, -1, false}, {1, 1, false},  {1, -1, false},
                          {-1, 1, false}, {-1, -1, false}, {0, 0, true}};
    Key best_key = current;
    double best_val = best;
    for (const auto& mv : moves) {
      int p = current.p + mv.dp, q = current.q + mv.dq;
      bool c = mv.flip ? !current.c : current.c;
      if (p < 0 || p > opt.max_p || q < 0 || q > opt.max_q) continue;
      double v = evaluate(p, q, c);
      if (v < best_val - 1e-6) {
        best_val = v;
        best_key = Key{p, q, c};
      }
    }
    if (!(best_key.p == current.p && best_key.q == current.q && best_key.c == current.c)) {
      current = best_key;
      best = best_val;
      improved = true;
    }
  }

  auto it = fits.find(current);
  if (it == fits.end()) {
    throw arima_error("auto_arima: selected model unavailable", json{{"failures", failures}});
  }
  return it->second;
}

// Point forecasts by the ARMA recursion on the differenced scale, integrated
// back d times; interval half-widths from the psi-weight variance ladder.
inline ForecastResult forecast_arima(const ArimaFit& fit, int h, double level = 0.95,
                                     int first_label = 0) {
  if (h < 1) throw std::domain_error("forecast_arima: horizon must be >= 1");
  const auto& w = fit.w;
  std::size_t n = w.size();
  int p = fit.order.p, q = fit.order.q, d = fit.order.d;

  // future values of the differenced series
  std::vector<double> w_ext(w);
  for (int k = 0; k < h; ++k) {
    double pred = fit.intercept;
    for (int i = 0; i < p; ++i) {
      std::size_t idx = n + static_cast<std::size_t>(k) - static_cast<std::size_t>(i) - 1;
      pred += fit.ar_coeffs[static_cast<std::size_t>(i)] * (w_ext[idx] - fit.intercept);
    }
    for (int j = 0; j < q; ++j) {
      long long eps_idx = static_cast<long long>(n) + k - j - 1;
      if (eps_idx >= 0 && eps_idx < static_cast<long long>(n)) {
        pred += fit.ma_coeffs[static_cast<std::size_t>(j)] *
                fit.residuals[static_cast<std::size_t>(eps_idx)];
      }
    }
    w_ext.push_back(pred);
  }

  // integrate d times using the stored tails
  std::vector<double> point(w_ext.end() - h, w_ext.end());
  for (int kd = d - 1; kd >= 0; --kd) {
    double prev = fit.integrate_tail[static_cast<std::size_t>(kd)];
    for (int k = 0; k < h; ++k) {
      point[static_cast<std::size_t>(k)] += prev;
      prev = point[static_cast<std::size_t>(k)];
    }
  }

  // psi weights of theta(B) / (phi(B) (1-B)^d)
  std::vector<double> big_phi;  // coefficients of phi(B)(1-B)^d, constant term 1
  {
    std::vector<double> poly{1.0};
    for (int i = 0; i < p; ++i) poly.push_back(-fit.ar_coeffs[static_cast<std::size_t>(i)]);
    for (int kd = 0; kd < d; ++kd) {
      std::vector<double> next(poly.size() + 1, 0.0);
      for (std::size_t i = 0; i < poly.size(); ++i) {
        next[i] += poly[i];
        next[i + 1] -= poly[i];
      }
      poly = std::move(next);
    }
    big_phi = std::move(poly);
  }
  std::vector<double> psi(static_cast<std::size_t>(h), 0.0);
  psi[0] = 1.0;
  for (int j = 1; j < h; ++j) {
    double acc = j <= q ? fit.ma_coeffs[static_cast<std::size_t>(j - 1)] : 0.0;
    for (int i = 1; i <= std::min<int>(j, p + d); ++i) {
      acc += -big_phi[static_cast<std::size_t>(i)] * psi[static_cast<std::size_t>(j - i)];
    }
    psi[static_cast<std::size_t>(j)] = acc;
  }

  double z = special::norm_ppf(0.5 + level / 2.0);
  ForecastResult out;
  out.level = level;
  out.model_tag = "arima(" + std::to_string(p) + "," + std::to_string(d) + "," +
                  std::to_string(q) + ")" + (fit.include_intercept ? "+intercept" : "");
  double var_acc = 0;
  for (int k = 0; k < h; ++k) {
    var_acc += psi[static_cast<std::size_t>(k)] * psi[static_cast<std::size_t>(k)];
    double sd = std::sqrt(fit.sigma2 * var_acc);
    out.point.push_back(point[static_cast<std::size_t>(k)]);
    out.lower.push_back(point[static_cast<std::size_t>(k)] - z * sd);
    out.upper.push_back(point[static_cast<std::size_t>(k)] + z * sd);
    out.horizon_labels.push_back(std::to_string(first_label + k + 1));
  }
  return out;
}

}  // namespace breachlens::forecast

#endif  // BREACHLENS_ARIMA_HPP
