#ifndef BREACHLENS_SHAPLEY_HPP
#define BREACHLENS_SHAPLEY_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <vector>

#include "breachlens/core.hpp"
#include "breachlens/prng.hpp"

// Interventional Shapley values: the value of a coalition S is the mean
// model output over background rows with the coalition's features taken from
// the explained row. Exact mode enumerates all 2^d coalitions with the
// combinatorial kernel weights; sampled mode averages marginal contributions
// over seeded feature permutations.

namespace breachlens::learn {

struct Attribution {
  std::vector<double> values;  // one per feature
  double baseline = 0;         // mean model output over the background
};

enum class ShapleyMode { exact, sampled };

namespace shap_detail {

template <typename F>
double coalition_value(const F& f, const std::vector<double>& x, const Matrix& background,
                       std::uint32_t mask) {
  std::vector<double> composite(x.size());
  double sum = 0;
  for (std::size_t b = 0; b < background.rows; ++b) {
    const double* bg = background.row(b);
    for (std::size_t j = 0; j < x.size(); ++j) {
      composite[j] = (mask >> j) & 1u ? x[j] : bg[j];
    }
    sum += f(composite);
  }
  return sum / static_cast<double>(background.rows);
}

}  // namespace shap_detail

template <typename F>
Attribution shapley_exact(const F& f, const std::vector<double>& x,
                          const Matrix& background) {
  std::size_t d = x.size();
  if (d > 16) {
    throw precondition_error(
        "shapley_exact: more than 16 features; use the sampled mode");
  }
  if (background.rows == 0) throw std::domain_error("shapley_exact: empty background");
  if (background.cols != d) throw std::domain_error("shapley_exact: width mismatch");

  std::size_t n_masks = std::size_t{1} << d;
  std::vector<double> value(n_masks);
  for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
    value[mask] = shap_detail::coalition_value(f, x, background, mask);
  }

  // weight(s) = s! (d-1-s)! / d!  computed in log space for stability
  std::vector<double> lfact(d + 1, 0.0);
  for (std::size_t i = 2; i <= d; ++i) lfact[i] = lfact[i - 1] + std::log(static_cast<double>(i));
  std::vector<double> weight(d);
  for (std::size_t s = 0; s < d; ++s) {
    weight[s] = std::exp(lfact[s] + lfact[d - 1 - s] - lfact[d]);
  }

  Attribution out;
  out.values.assign(d, 0.0);
  out.baseline = value[0];
  for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
    int s = std::popcount(mask);
    for (std::size_t i = 0; i < d; ++i) {
      if ((mask >> i) & 1u) continue;
      out.values[i] += weight[static_cast<std::size_t>(s)] *
                       (value[mask | (1u << i)] - value[mask]);
    }
  }
  return out;
}

template <typename F>
Attribution shapley_sampled(const F& f, const std::vector<double>& x,
                            const Matrix& background, std::size_t n_permutations,
                            std::uint64_t seed) {
  std::size_t d = x.size();
  if (background.rows == 0) throw std::domain_error("shapley_sampled: empty background");
  if (background.cols != d) throw std::domain_error("shapley_sampled: width mismatch");
  if (n_permutations == 0) throw std::domain_error("shapley_sampled: need permutations");

  Attribution out;
  out.values.assign(d, 0.0);
  out.baseline = shap_detail::coalition_value(f, x, background, 0u);

  Rng rng(seed);
  std::vector<std::size_t> order(d);
  for (std::size_t p = 0; p < n_permutations; ++p) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    std::uint32_t mask = 0;
    double prev = out.baseline;
    for (std::size_t i : order) {
      mask |= (1u << i);
      double cur = shap_detail::coalition_value(f, x, background, mask);
      out.values[i] += cur - prev;
      prev = cur;
    }
  }
  for (double& v : out.values) v /= static_cast<double>(n_permutations);
  return out;
}

template <typename F>
Attribution shapley_attribution(const F& f, const std::vector<double>& x,
                                const Matrix& background, ShapleyMode mode,
                                std::size_t n_permutations = 64, std::uint64_t seed = 0) {
  if (mode == ShapleyMode::exact) return shapley_exact(f, x, background);
  return shapley_sampled(f, x, background, n_permutations, seed);
}

struct ImportanceEntry {
  std::size_t feature = 0;
  double mean_abs_shap = 0;
};

// Mean |phi| per feature over the evaluation rows, descending; column order
// breaks ties so the ranking is stable.
template <typename F>
std::vector<ImportanceEntry> global_importance(const F& f, const Matrix& x_eval,
                                               const Matrix& background,
                                               ShapleyMode mode = ShapleyMode::exact,
                                               std::size_t n_permutations = 64,
                                               std::uint64_t seed = 0) {
  if (x_eval.rows == 0) throw std::domain_error("global_importance: empty evaluation set");
  std::size_t d = x_eval.cols;
  std::vector<double> acc(d, 0.0);
  for (std::size_t r = 0; r < x_eval.rows; ++r) {
    Attribution att = shapley_attribution(f, x_eval.row_copy(r), background, mode,
                                          n_permutations, seed + r);
    for (std::size_t j = 0; j < d; ++j) acc[j] += std::fabs(att.values[j]);
  }
  std::vector<ImportanceEntry> out(d);
  for (std::size_t j = 0; j < d; ++j) {
    out[j] = ImportanceEntry{j, acc[j] / static_cast<double>(x_eval.rows)};
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.mean_abs_shap > b.mean_abs_shap;
  });
  return out;
}

// Seeded background subsample (without replacement) used as the default
// reference set for attributions.
inline Matrix background_subsample(const Matrix& x, std::size_t max_rows, std::uint64_t seed) {
  if (x.rows <= max_rows) return x;
  std::vector<std::size_t> idx(x.rows);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(idx);
  idx.resize(max_rows);
  std::sort(idx.begin(), idx.end());
  Matrix out(0, x.cols);
  for (auto i : idx) out.push_row(x.row_copy(i));
  return out;
}

}  // namespace breachlens::learn

#endif  // BREACHLENS_SHAPLEY_HPP
