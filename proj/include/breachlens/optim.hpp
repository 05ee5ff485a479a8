#ifndef BREACHLENS_OPTIM_HPP
#define BREACHLENS_OPTIM_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace breachlens::optim {

struct NelderMeadResult {
  std::vector<double> x;
  double fx = 0;
  int iterations = 0;
  bool converged = false;
};

// Standard Nelder-Mead simplex with deterministic initialization. Good
// enough for the handful of ARMA parameters this project optimizes.
inline NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, double step = 0.25, double ftol = 1e-12,
    double xtol = 1e-10, int max_iter = 0) {
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  std::size_t n = x0.size();
  if (max_iter == 0) max_iter = 400 * static_cast<int>(n) + 400;

  std::vector<std::vector<double>> simplex;
  simplex.push_back(x0);
  for (std::size_t i = 0; i < n; ++i) {
    auto v = x0;
    v[i] += (v[i] != 0.0 ? step * std::fabs(v[i]) + 0.05 : step);
    simplex.push_back(std::move(v));
  }
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

  NelderMeadResult res;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    std::vector<std::size_t> order(n + 1);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> sx(n + 1);
    std::vector<double> sf(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      sx[i] = simplex[order[i]];
      sf[i] = fv[order[i]];
    }
    simplex = std::move(sx);
    fv = std::move(sf);

    double spread = std::fabs(fv[n] - fv[0]);
    double xspread = 0;
    for (std::size_t i = 0; i < n; ++i) {
      xspread = std::max(xspread, std::fabs(simplex[n][i] - simplex[0][i]));
    }
    if (spread < ftol * (std::fabs(fv[0]) + ftol) && xspread < xtol) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> v(n);
      for (std::size_t j = 0; j < n; ++j) {
        v[j] = centroid[j] + coef * (centroid[j] - simplex[n][j]);
      }
      return v;
    };

    auto xr = blend(alpha);
    double fr = f(xr);
    if (fr < fv[0]) {
      auto xe = blend(gamma);
      double fe = f(xe);
      if (fe < fr) {
        simplex[n] = std::move(xe);
        fv[n] = fe;
      } else {
        simplex[n] = std::move(xr);
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      simplex[n] = std::move(xr);
      fv[n] = fr;
    } else {
      auto xc = blend(fr < fv[n] ? rho : -rho);
      double fc = f(xc);
      if (fc < std::min(fr, fv[n])) {
        simplex[n] = std::move(xc);
        fv[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            simplex[i][j] = simplex[0][j] + sigma * (simplex[i][j] - simplex[0][j]);
          }
          fv[i] = f(simplex[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (fv[i] < fv[best]) best = i;
  }
  res.x = simplex[best];
  res.fx = fv[best];
  res.iterations = iter;
  return res;
}

}  // namespace breachlens::optim

#endif  // BREACHLENS_OPTIM_HPP
