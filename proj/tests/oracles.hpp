// Test-side reference implementations, kept independent of the library code
// paths they check. Quadrature-based tail probabilities, brute-force rank
// statistics, and enumeration oracles live here.
#ifndef BREACHLENS_TESTS_ORACLES_HPP
#define BREACHLENS_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace oracles {

// Adaptive Simpson in long double.
inline long double adaptive_simpson_(const std::function<long double(long double)>& f,
                                     long double a, long double b, long double fa,
                                     long double fb, long double fm, long double eps,
                                     int depth) {
  long double m = (a + b) / 2;
  long double lm = (a + m) / 2, rm = (m + b) / 2;
  long double flm = f(lm), frm = f(rm);
  long double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  long double left = (m - a) / 6 * (fa + 4 * flm + fm);
  long double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15 * eps) {
    return left + right + (left + right - whole) / 15;
  }
  return adaptive_simpson_(f, a, m, fa, fm, flm, eps / 2, depth - 1) +
         adaptive_simpson_(f, m, b, fm, fb, frm, eps / 2, depth - 1);
}

inline long double integrate(const std::function<long double(long double)>& f,
                             long double a, long double b, long double eps = 1e-15L) {
  long double m = (a + b) / 2;
  return adaptive_simpson_(f, a, b, f(a), f(b), f(m), eps, 28);
}

// P(F(df1, df2) > x) by integrating the density over [0, x] and subtracting.
// Substituting t = u^2 removes the t^(a-1) endpoint singularity at df1 = 1.
inline double f_sf_quadrature(double x, double df1, double df2) {
  if (x <= 0) return 1.0;
  long double a = df1 / 2.0L, b = df2 / 2.0L;
  long double ln_c = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                     a * std::log(static_cast<long double>(df1) / df2);
  long double pow_u = 2 * a - 1;  // >= 0 for df1 >= 1; exactly 0 at df1 = 1
  auto integrand = [&](long double u) -> long double {
    if (u <= 0) return pow_u == 0 ? 2 * std::exp(ln_c) : 0.0L;
    long double t = u * u;
    return 2 * std::exp(ln_c + pow_u * std::log(u) -
                        (a + b) * std::log1p(static_cast<long double>(df1) / df2 * t));
  };
  long double cdf = integrate(integrand, 0.0L, std::sqrt(static_cast<long double>(x)));
  return static_cast<double>(1.0L - cdf);
}

// P(chi2(df) > x), same approach and substitution.
inline double chi2_sf_quadrature(double x, double df) {
  if (x <= 0) return 1.0;
  long double k = df / 2.0L;
  long double ln_c = -k * std::log(2.0L) - std::lgamma(k);
  long double pow_u = 2 * k - 1;  // exactly 0 at df = 1
  auto integrand = [&](long double u) -> long double {
    if (u <= 0) return pow_u == 0 ? 2 * std::exp(ln_c) : 0.0L;
    return 2 * std::exp(ln_c + pow_u * std::log(u) - u * u / 2);
  };
  long double cdf = integrate(integrand, 0.0L, std::sqrt(static_cast<long double>(x)));
  return static_cast<double>(1.0L - cdf);
}

// Average ranks by explicit tie-group walking; independent of the library's.
inline std::vector<double> brute_ranks(const std::vector<double>& v) {
  std::size_t n = v.size();
  std::vector<double> ranks(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (v[j] < v[i]) ++less;
      if (v[j] == v[i]) ++equal;
    }
    // ranks of the tie block are less+1 .. less+equal; average them
    ranks[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return ranks;
}

// Exact two-sided Mann-Whitney p-value by enumerating every way the n1 ranks
// can fall among the N positions (tie-free data only).
struct MwExact {
  double u = 0;
  double p = 1;
};

inline MwExact mw_exact_enumeration(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  // observed rank sum of sample a
  double r1 = 0;
  for (double x : a) {
    auto lo = std::lower_bound(sorted.begin(), sorted.end(), x);
    r1 += static_cast<double>(lo - sorted.begin()) + 1.0;
  }
  double u_obs = static_cast<double>(n1 * n2) +
                 static_cast<double>(n1 * (n1 + 1)) / 2.0 - r1;

  // enumerate combinations via selection mask
  std::vector<int> mask(n, 0);
  std::fill(mask.begin(), mask.begin() + static_cast<long>(n1), 1);
  std::sort(mask.begin(), mask.end());
  double total = 0, le = 0, ge = 0;
  do {
    double rs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask[i]) rs += static_cast<double>(i + 1);
    }
    double u = static_cast<double>(n1 * n2) +
               static_cast<double>(n1 * (n1 + 1)) / 2.0 - rs;
    total += 1;
    if (u <= u_obs + 1e-9) le += 1;
    if (u >= u_obs - 1e-9) ge += 1;
  } while (std::next_permutation(mask.begin(), mask.end()));

  MwExact out;
  out.u = u_obs;
  out.p = std::min(1.0, 2.0 * std::min(le, ge) / total);
  return out;
}

// Central finite-difference gradient of a scalar function.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = x[i];
    x[i] = orig + h;
    double fp = f(x);
    x[i] = orig - h;
    double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

}  // namespace oracles

#endif  // BREACHLENS_TESTS_ORACLES_HPP
